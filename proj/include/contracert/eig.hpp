#pragma once

#include <stdexcept>
#include <utility>

#include "contracert/mat.hpp"

namespace contracert {

struct EigResult {
    Vec values;   // descending
    Mat vectors;  // column k pairs with values[k]
};

struct EigFailure : std::runtime_error {
    Mat matrix;
    explicit EigFailure(Mat m)
        : std::runtime_error("eigensolver did not converge within the sweep cap"),
          matrix(std::move(m)) {}
};

// Full spectrum of a symmetric matrix via cyclic Jacobi rotations with a
// fixed sweep order. The input is symmetrized by averaging first.
EigResult eigh_jacobi(const Mat& sym);

// Dominant eigenvalue and unit eigenvector.
std::pair<double, Vec> lambda_max_sym(const Mat& g);

}  // namespace contracert
