#pragma once

#include <esfem/fem.hpp>
#include <esfem/mesh.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace esfem {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussLegendre
{
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendre gauss_legendre(int points);

struct IdentityCheck
{
    double lhs = 0.0;
    double rhs = 0.0;
    double difference = 0.0; ///< |lhs - rhs|
};

struct MatrixDifferenceCheck
{
    IdentityCheck mass;      ///< w^T (M(y+e) - M(y)) z  vs  int_0^1 int w (div e) z
    IdentityCheck stiffness; ///< w^T (A(y+e) - A(y)) z  vs  int_0^1 int grad w . (D e) grad z
};

///
/// Assembles both sides of the matrix-difference identities. The right-hand sides integrate over
/// theta with Gauss-Legendre, on each intermediate surface y + theta e.
/// Throws DegenerateIntermediateMesh if an intermediate surface has a degenerate element.
///
MatrixDifferenceCheck check_matrix_difference(const SurfaceMesh& mesh_y, const Vector& e, const Vector& w,
                                              const Vector& z, int theta_points);

/// Elementwise tangential divergence of a nodal vector field (3N) on the mesh.
std::vector<double> tangential_divergence(const SurfaceMesh& mesh, const Vector& field);

/// int w_h z_h (div V_h): the derivative of w^T M z when the nodes move with velocity V.
double transport_q_form(const SurfaceMesh& mesh, const Vector& velocity, const Vector& w, const Vector& z);

struct TransportCheck
{
    double exact_derivative = 0.0;          ///< q-form at s0
    std::vector<double> steps;              ///< ds, ds/2, ds/4
    std::vector<double> fd_errors;          ///< |forward difference - exact| per step
    double observed_order = 0.0;            ///< min over the two consecutive ratios
};

///
/// Compares forward differences of s -> w^T M(x(s)) z against the q-form assembled with the
/// path velocity, and reports the observed order of the difference quotient.
///
TransportCheck check_transport(const SurfaceMesh& topology, const std::function<Vector(double)>& path,
                               const std::function<Vector(double)>& path_velocity, const Vector& w,
                               const Vector& z, double s0, double ds);

struct NormEquivalenceCheck
{
    double mu = 0.0;        ///< 1.1 * max over theta in {0,1/4,1/2,3/4,1} of max |div e_h|
    double ratio = 0.0;     ///< ||w||_M(y+e) / ||w||_M(y)
    double bound = 0.0;     ///< exp(mu / 2)
};

NormEquivalenceCheck check_norm_equivalence(const SurfaceMesh& mesh_y, const Vector& e, const Vector& w);

struct NormEquivalenceSweep
{
    std::size_t samples = 0;
    std::size_t violations = 0;      ///< ratio > bound (1 + 1e-6)
    double worst_ratio_over_bound = 0.0;
};

/// Random (w, e) pairs with ||e||_inf = scale * h_max.
NormEquivalenceSweep norm_equivalence_sweep(const SurfaceMesh& mesh_y, std::size_t samples, std::uint64_t seed,
                                            double scale);

struct SphereIdentities
{
    int level = 0;
    double area_defect = 0.0;          ///< (4 pi r^2 - area) / (4 pi r^2)
    double normal_sum = 0.0;           ///< |sum area nu| / area
    double laplace_residual = 0.0;     ///< max_j |(A X - (2/r^2) M X)_j|
};

SphereIdentities check_sphere_identities(int level, double radius = 1.0);

/// One line of the verification report.
struct CheckRecord
{
    enum class Comparison { at_most, at_least };

    std::string name;
    double residual = 0.0;
    double bound = 0.0;
    Comparison comparison = Comparison::at_most;
    std::string tolerance_kind; ///< "fixed" or "recorded"

    bool pass() const { return comparison == Comparison::at_most ? residual <= bound : residual >= bound; }
};

/// "CHECK <name> residual=<r> bound=<b> PASS|FAIL"
std::string format_record(const CheckRecord& record);

struct VerificationOptions
{
    std::uint64_t seed = 1;
    int mesh_level = 2;
    int theta_points = 8;
    std::size_t norm_samples = 100;
};

/// Runs every check; records are in a fixed order.
std::vector<CheckRecord> run_verification_suite(const VerificationOptions& options = {});

} // namespace esfem
