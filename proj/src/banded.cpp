#include "segwave/banded.hpp"

#include <cmath>
#include <stdexcept>

namespace segwave {

BandedMatrix::BandedMatrix(std::size_t n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), rows_(2 * kl + ku + 1),
      a_(n * static_cast<std::size_t>(rows_), 0.0), pivot_(n, 0) {}

bool BandedMatrix::in_band(std::size_t row, std::size_t col) const {
    const long d = static_cast<long>(row) - static_cast<long>(col);
    return d <= kl_ && -d <= ku_;
}

double& BandedMatrix::at(std::size_t row, std::size_t col) {
    if (!in_band(row, col)) throw std::out_of_range("entry outside the band");
    // row index within the column's band slot; top kl rows are pivot fill
    const int br = kl_ + ku_ + static_cast<int>(row) - static_cast<int>(col);
    return entry(br, col);
}

double BandedMatrix::get(std::size_t row, std::size_t col) const {
    if (!in_band(row, col)) return 0.0;
    const int br = kl_ + ku_ + static_cast<int>(row) - static_cast<int>(col);
    return entry(br, col);
}

void BandedMatrix::clear() {
    std::fill(a_.begin(), a_.end(), 0.0);
    factored_ = false;
}

bool BandedMatrix::factor() {
    const long n = static_cast<long>(n_);
    const int kv = kl_ + ku_;  // first true row of each column slot
    for (long j = 0; j < n; ++j) {
        // pivot search within the column's sub-diagonal reach
        const long reach = std::min<long>(kl_, n - 1 - j);
        long p = 0;
        double pmax = std::abs(entry(kv, j));
        for (long i = 1; i <= reach; ++i) {
            const double v = std::abs(entry(kv + static_cast<int>(i), j));
            if (v > pmax) {
                pmax = v;
                p = i;
            }
        }
        if (pmax == 0.0) return false;
        pivot_[j] = static_cast<int>(j + p);

        const long ncols = std::min<long>(kv, n - 1 - j);  // columns touched
        if (p != 0) {
            for (long c = 0; c <= ncols; ++c) {
                std::swap(entry(kv - static_cast<int>(c), j + c),
                          entry(kv - static_cast<int>(c) + static_cast<int>(p),
                                j + c));
            }
        }
        const double piv = entry(kv, j);
        for (long i = 1; i <= reach; ++i) {
            const double m = entry(kv + static_cast<int>(i), j) / piv;
            entry(kv + static_cast<int>(i), j) = m;
            for (long c = 1; c <= ncols; ++c) {
                entry(kv - static_cast<int>(c) + static_cast<int>(i), j + c) -=
                    m * entry(kv - static_cast<int>(c), j + c);
            }
        }
    }
    factored_ = true;
    return true;
}

void BandedMatrix::solve_factored(std::vector<double>& rhs) const {
    if (!factored_) throw std::logic_error("matrix is not factored");
    const long n = static_cast<long>(n_);
    const int kv = kl_ + ku_;
    // forward substitution with the recorded row swaps
    for (long j = 0; j < n; ++j) {
        const long p = pivot_[j];
        if (p != j) std::swap(rhs[j], rhs[p]);
        const long reach = std::min<long>(kl_, n - 1 - j);
        for (long i = 1; i <= reach; ++i) {
            rhs[j + i] -= entry(kv + static_cast<int>(i), j) * rhs[j];
        }
    }
    // back substitution
    for (long j = n - 1; j >= 0; --j) {
        const long reach = std::min<long>(kv, j);
        rhs[j] /= entry(kv, j);
        for (long i = 1; i <= reach; ++i) {
            rhs[j - i] -= entry(kv - static_cast<int>(i), j) * rhs[j];
        }
    }
}

bool BandedMatrix::solve(std::vector<double>& rhs) {
    if (!factored_ && !factor()) return false;
    solve_factored(rhs);
    return true;
}

}  // namespace segwave
