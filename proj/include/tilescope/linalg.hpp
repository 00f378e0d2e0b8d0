#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tilescope/numberfield.hpp"

namespace tilescope {

using IntMatrix = std::vector<std::vector<long long>>;
using BigIntMatrix = std::vector<std::vector<Integer>>;

BigIntMatrix to_big(const IntMatrix& m);
BigIntMatrix multiply(const BigIntMatrix& a, const BigIntMatrix& b);
BigIntMatrix power(const IntMatrix& m, unsigned k);

// smallest l <= n^2 with m^l entrywise positive
std::optional<unsigned> primitivity_exponent(const IntMatrix& m);

struct PerronFrobenius {
    double value = 0;
    std::vector<double> right;  // normalised to sum 1
    std::vector<double> left;   // normalised to sum 1
    double second_modulus = 0;  // largest |lambda| among the remaining eigenvalues
};

PerronFrobenius perron_frobenius(const IntMatrix& m);

// exact inverse; nullopt when singular
std::optional<RationalMatrix> inverse(const RationalMatrix& m);

// rank over Q of a list of rational row vectors
std::size_t rational_rank(const std::vector<std::vector<Rational>>& rows);

// Z-span of rational vectors, kept in Hermite normal form after clearing a
// common denominator.
class IntegerLattice {
public:
    IntegerLattice() = default;
    IntegerLattice(const std::vector<std::vector<Rational>>& generators, std::size_t dim);

    std::size_t rank() const { return hnf_.size(); }
    std::size_t dim() const { return dim_; }
    bool contains(const std::vector<Rational>& v) const;
    // basis rows, rescaled back to the rational coordinates
    std::vector<std::vector<Rational>> basis() const;

private:
    std::size_t dim_ = 0;
    Integer scale_ = 1;
    std::vector<std::vector<Integer>> hnf_;
    std::vector<std::size_t> pivots_;
};

// Row-style Hermite normal form of an integer matrix (zero rows dropped).
std::vector<std::vector<Integer>> hermite_normal_form(std::vector<std::vector<Integer>> rows,
                                                      std::vector<std::size_t>* pivots = nullptr);

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& m);

}  // namespace tilescope
