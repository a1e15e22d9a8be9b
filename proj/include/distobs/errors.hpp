#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace distobs {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidMatrix : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class NotObservable : public Error {
public:
    using Error::Error;
};

class InvalidTransform : public Error {
public:
    using Error::Error;
};

class InvalidSignal : public Error {
public:
    using Error::Error;
};

class InvalidWeights : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

// Some nodes cannot be reached from the requested roots.
class NotSpanning : public Error {
public:
    explicit NotSpanning(std::vector<int> nodes);
    const std::vector<int>& unreachable() const { return unreachable_; }

private:
    std::vector<int> unreachable_;
};

class IllConditionedJordan : public Error {
public:
    IllConditionedJordan(std::complex<double> lambda, const std::string& what);
    std::complex<double> lambda() const { return lambda_; }

private:
    std::complex<double> lambda_;
};

// Raised by the design step when the chosen scheme has no valid construction.
class Infeasible : public Error {
public:
    using Error::Error;
};

class Condition2Infeasible : public Infeasible {
public:
    Condition2Infeasible(std::complex<double> lambda, std::vector<int> unreachable);
    std::complex<double> lambda() const { return lambda_; }
    const std::vector<int>& unreachable() const { return unreachable_; }

private:
    std::complex<double> lambda_;
    std::vector<int> unreachable_;
};

std::string format_complex(std::complex<double> z);

}  // namespace distobs
