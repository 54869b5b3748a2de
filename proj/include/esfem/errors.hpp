#pragma once

#include <stdexcept>
#include <string>

namespace esfem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidMesh : public Error
{
public:
    using Error::Error;
};

class DegenerateElement : public Error
{
public:
    DegenerateElement(std::size_t triangle, double area)
        : Error("degenerate element " + std::to_string(triangle) + " (area " + std::to_string(area) + ")")
        , m_triangle(triangle)
    {}

    std::size_t triangle() const { return m_triangle; }

private:
    std::size_t m_triangle;
};

class FieldLengthMismatch : public Error
{
public:
    using Error::Error;
};

class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

class NonFiniteIntegrand : public Error
{
public:
    using Error::Error;
};

class IoError : public Error
{
public:
    using Error::Error;
};

class OffSurface : public Error
{
public:
    using Error::Error;
};

class DomainError : public Error
{
public:
    using Error::Error;
};

class MissingExactSolution : public Error
{
public:
    MissingExactSolution() : Error("problem has no exact solution attached") {}
};

class EmptyTrajectory : public Error
{
public:
    EmptyTrajectory() : Error("trajectory contains no snapshots") {}
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

class DegenerateIntermediateMesh : public Error
{
public:
    using Error::Error;
};

/// The evolving mesh fell below the admissibility threshold.
class MeshDegenerated : public Error
{
public:
    MeshDegenerated(double time, double min_angle)
        : Error("mesh degenerated at t=" + std::to_string(time) + " (min angle " + std::to_string(min_angle)
                + " deg)")
        , m_time(time)
    {}

    double time() const { return m_time; }

private:
    double m_time;
};

class LinearSolveFailure : public Error
{
public:
    LinearSolveFailure(double residual, int iterations)
        : Error("linear solve failed: residual " + std::to_string(residual) + " after "
                + std::to_string(iterations) + " iterations")
        , m_residual(residual)
        , m_iterations(iterations)
    {}

    double residual() const { return m_residual; }
    int iterations() const { return m_iterations; }

private:
    double m_residual;
    int m_iterations;
};

} // namespace esfem
