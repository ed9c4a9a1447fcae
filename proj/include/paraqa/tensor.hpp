#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace paraqa {

/// Dense row-major matrix of doubles. The whole model runs in double
/// precision so analytic gradients can be checked against finite differences
/// at tight tolerances.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double& operator()(int r, int c) {
        return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                    static_cast<std::size_t>(c)];
    }
    double operator()(int r, int c) const {
        return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                    static_cast<std::size_t>(c)];
    }
    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols); }
    const double* row(int r) const {
        return data.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
    }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s);

    std::size_t numel() const { return data.size(); }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

/// Ordered collection of named tensors: model parameters, their gradients and
/// optimizer moments all share this container, which also defines the
/// checkpoint layout. Iteration order is insertion order, everywhere.
class ParamSet {
  public:
    Tensor& add(const std::string& name, std::vector<int> shape);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) > 0; }

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_[i]; }
    Tensor& tensor(std::size_t i) { return tensors_[i]; }
    const Tensor& tensor(std::size_t i) const { return tensors_[i]; }

    /// Same names and shapes, all zeros.
    ParamSet zeros_like() const;
    void zero_all();
    std::size_t total_elements() const;

  private:
    std::vector<std::string> names_;
    std::vector<Tensor> tensors_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Accumulates src into dst (same layout required).
void accumulate(ParamSet& dst, const ParamSet& src);

}  // namespace paraqa
