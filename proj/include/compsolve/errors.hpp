#pragma once

#include <stdexcept>
#include <string>

namespace compsolve {

/// Base class of every failure raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class NonFiniteEntry : public Error
{
public:
  NonFiniteEntry() : Error("vector has a NaN or infinite entry") {}
};

class DimensionMismatch : public Error
{
public:
  DimensionMismatch(long expected, long got)
    : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
            std::to_string(got))
  {}
};

class UnsupportedNorm : public Error
{
public:
  using Error::Error;
};

/// A point outside the declared ball was handed to a mapping.
class OutOfDomain : public Error
{
public:
  using Error::Error;
};

class SingularJacobian : public Error
{
public:
  using Error::Error;
};

class SurrogateSolveFailed : public Error
{
public:
  using Error::Error;
};

class DegenerateDenominator : public Error
{
public:
  using Error::Error;
};

class AllPairsDegenerate : public Error
{
public:
  AllPairsDegenerate() : Error("every sampled pair had f0(x1) == f0(x2)") {}
};

class CoefficientEnvelopeViolated : public Error
{
public:
  using Error::Error;
};

class QuadratureUnderResolved : public Error
{
public:
  using Error::Error;
};

/// Target lies outside the radius on which convergence is certified.
class TargetOutsideCertifiedRadius : public Error
{
public:
  using Error::Error;
};

class StepRejected : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

} // namespace compsolve
