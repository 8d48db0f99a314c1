#pragma once

#include <vector>

#include "lyapgap/matrix.hpp"

namespace lyapgap {

/// A linear subspace of R^d held as an orthonormal frame (d x k). The zero
/// subspace (k = 0) and the full space (k = d) are both legal.
struct Subspace {
  int ambient_dim = 0;
  Mat frame;  // ambient_dim x rank, orthonormal columns

  int rank() const { return frame.cols; }
};

/// Wrap a frame after checking orthonormality to 1e-10.
Subspace make_subspace(const Mat& frame);

/// Subspace spanned by the columns of x (orthonormalized, near-dependent
/// columns dropped).
Subspace span_of(const Mat& x, double tol = 1e-12);

/// True when every direction of inner lies in outer to within tol (residual
/// norm of each inner frame column after projecting onto outer).
bool contains(const Subspace& outer, const Subspace& inner, double tol = 1e-8);

/// Orthonormal directions that extend the inner frame to a basis of outer:
/// Gram-Schmidt of outer's frame columns against inner's, in order.
/// Deterministic given both frames.
Mat complete_within(const Subspace& inner, const Subspace& outer);

/// Matrix of proj_{B(V) minus B(U)} . B . proj_{V minus U} in deterministic
/// orthonormal bases of the complement spaces; U must be contained in V and
/// B invertible (smallest singular value at least 1e-12 of the largest).
Mat restricted_operator(const Mat& b, const Subspace& inner, const Subspace& outer);

/// k-th exterior power in the lexicographic basis e_{i1}^...^e_{ik}; entry
/// (I, J) is the k x k minor det(A[I, J]).
Mat exterior_power(const Mat& a, int k);

/// A / |det A|^(1/d): the determinant-one representative (up to sign) with
/// the same projective action.
Mat normalize_det(const Mat& a);

/// |det D_x A_*| of the induced map on the projective circle RP^1 at the
/// point with angle theta (round metric, total length pi). Equals
/// |det A| / ||A x||^2 for the unit vector x = (cos theta, sin theta).
double projective_jacobian(const Mat& a, double theta);

}  // namespace lyapgap
