#include "distobs/errors.hpp"

#include <cmath>
#include <sstream>

namespace distobs {

namespace {

std::string join_nodes(const std::vector<int>& nodes) {
    std::ostringstream os;
    os << "{";
    for (size_t k = 0; k < nodes.size(); ++k) os << (k ? "," : "") << nodes[k];
    os << "}";
    return os.str();
}

}  // namespace

std::string format_complex(std::complex<double> z) {
    std::ostringstream os;
    os.precision(10);
    os << z.real();
    if (z.imag() != 0.0) os << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

NotSpanning::NotSpanning(std::vector<int> nodes)
    : Error("nodes not reachable from the roots: " + join_nodes(nodes)), unreachable_(std::move(nodes)) {}

IllConditionedJordan::IllConditionedJordan(std::complex<double> lambda, const std::string& what)
    : Error("ill-conditioned Jordan structure at lambda=" + format_complex(lambda) + ": " + what +
            " (the sub-state decomposition scheme does not need a Jordan form)"),
      lambda_(lambda) {}

Condition2Infeasible::Condition2Infeasible(std::complex<double> lambda, std::vector<int> unreachable)
    : Infeasible("no spanning forest from the root nodes of lambda=" + format_complex(lambda) +
                 "; unreachable nodes " + join_nodes(unreachable)),
      lambda_(lambda),
      unreachable_(std::move(unreachable)) {}

}  // namespace distobs
