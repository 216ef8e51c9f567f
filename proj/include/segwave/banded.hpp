#ifndef SEGWAVE_BANDED_HPP
#define SEGWAVE_BANDED_HPP

#include <cstddef>
#include <vector>

namespace segwave {

/// Square banded matrix with kl sub- and ku super-diagonals, stored in the
/// LAPACK general-band layout with room for fill-in from partial pivoting.
class BandedMatrix {
  public:
    BandedMatrix(std::size_t n, int kl, int ku);

    std::size_t size() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    double& at(std::size_t row, std::size_t col);
    double get(std::size_t row, std::size_t col) const;
    bool in_band(std::size_t row, std::size_t col) const;
    void clear();

    /// In-place LU with partial pivoting followed by the triangular solves;
    /// returns false when a pivot degenerates. The matrix is consumed.
    bool solve(std::vector<double>& rhs);

    /// Factor once, then solve repeatedly.
    bool factor();
    void solve_factored(std::vector<double>& rhs) const;

  private:
    std::size_t n_;
    int kl_, ku_, rows_;
    std::vector<double> a_;      // column-major band storage
    std::vector<int> pivot_;
    bool factored_ = false;

    double& entry(int band_row, std::size_t col) {
        return a_[col * rows_ + static_cast<std::size_t>(band_row)];
    }
    double entry(int band_row, std::size_t col) const {
        return a_[col * rows_ + static_cast<std::size_t>(band_row)];
    }
};

}  // namespace segwave

#endif
