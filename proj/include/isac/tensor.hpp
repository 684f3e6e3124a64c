#ifndef ISAC_TENSOR_HPP
#define ISAC_TENSOR_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace isac {

using cdouble = std::complex<double>;

/// Dense 3D cube of complex samples, row-major over (i, j, l):
/// element (i, j, l) lives at ((i * dim1) + j) * dim2 + l.
/// Used for the received tensor Y[k,n,m], its fourth power Z, spectra,
/// and per-source symbol tensors X[k,n,p].
class Cube {
public:
    Cube() = default;
    Cube(std::size_t d0, std::size_t d1, std::size_t d2, cdouble fill = {})
        : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, fill) {}

    std::size_t dim0() const { return d0_; }
    std::size_t dim1() const { return d1_; }
    std::size_t dim2() const { return d2_; }
    std::size_t size() const { return data_.size(); }

    cdouble& operator()(std::size_t i, std::size_t j, std::size_t l) {
        return data_[(i * d1_ + j) * d2_ + l];
    }
    const cdouble& operator()(std::size_t i, std::size_t j, std::size_t l) const {
        return data_[(i * d1_ + j) * d2_ + l];
    }

    cdouble* data() { return data_.data(); }
    const cdouble* data() const { return data_.data(); }

    bool same_shape(const Cube& other) const {
        return d0_ == other.d0_ && d1_ == other.d1_ && d2_ == other.d2_;
    }

    void check_shape(std::size_t d0, std::size_t d1, std::size_t d2) const {
        if (d0_ != d0 || d1_ != d1 || d2_ != d2)
            throw std::invalid_argument("Cube: shape mismatch");
    }

private:
    std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
    std::vector<cdouble> data_;
};

} // namespace isac

#endif
