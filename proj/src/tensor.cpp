#include "paraqa/tensor.hpp"

#include <stdexcept>

#include "paraqa/errors.hpp"

namespace paraqa {

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
    std::size_t n = 1;
    for (const int d : shape) {
        if (d <= 0) {
            throw InputError("tensor dimensions must be positive");
        }
        n *= static_cast<std::size_t>(d);
    }
    data.assign(n, 0.0);
}

Tensor& ParamSet::add(const std::string& name, std::vector<int> shape) {
    if (has(name)) {
        throw StateError("duplicate tensor name: " + name);
    }
    index_.emplace(name, names_.size());
    names_.push_back(name);
    tensors_.emplace_back(std::move(shape));
    return tensors_.back();
}

Tensor& ParamSet::at(const std::string& name) {
    const auto it = index_.find(name);
    if (it == index_.end()) {
        throw StateError("unknown tensor: " + name);
    }
    return tensors_[it->second];
}

const Tensor& ParamSet::at(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) {
        throw StateError("unknown tensor: " + name);
    }
    return tensors_[it->second];
}

ParamSet ParamSet::zeros_like() const {
    ParamSet out;
    for (std::size_t i = 0; i < size(); ++i) {
        out.add(names_[i], tensors_[i].shape);
    }
    return out;
}

void ParamSet::zero_all() {
    for (Tensor& t : tensors_) {
        t.zero();
    }
}

std::size_t ParamSet::total_elements() const {
    std::size_t n = 0;
    for (const Tensor& t : tensors_) {
        n += t.numel();
    }
    return n;
}

void accumulate(ParamSet& dst, const ParamSet& src) {
    if (dst.size() != src.size()) {
        throw StateError("parameter set layout mismatch");
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
        Tensor& d = dst.tensor(i);
        const Tensor& s = src.tensor(i);
        if (d.numel() != s.numel()) {
            throw StateError("tensor shape mismatch: " + dst.name(i));
        }
        for (std::size_t k = 0; k < d.numel(); ++k) {
            d.data[k] += s.data[k];
        }
    }
}

}  // namespace paraqa
