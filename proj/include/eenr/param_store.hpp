#pragma once

#include <map>
#include <string>
#include <vector>

#include "eenr/rng.hpp"
#include "eenr/tensor.hpp"

namespace eenr {

/// Named trainable parameters plus per-parameter Adam state.
///
/// Iteration order is always the sorted name order, so a fixed seed yields a
/// bitwise-identical parameter trajectory on one thread. Checkpoints are JSON
/// with a magic header (see save()); doubles survive the round trip exactly.
class ParamStore {
public:
    /// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)); fan_in is the input dim for
    /// matrices (rows, since activations multiply as x*W) and the length for
    /// vectors.
    Tensor param(const std::string& name, std::vector<int> shape, Rng& rng);
    Tensor param_uniform(const std::string& name, std::vector<int> shape, double lo, double hi,
                         Rng& rng);
    Tensor param_const(const std::string& name, std::vector<int> shape, double v);
    Tensor param_values(const std::string& name, std::vector<int> shape,
                        std::vector<double> values);

    bool has(const std::string& name) const { return params_.count(name) > 0; }
    Tensor get(const std::string& name) const;
    std::vector<std::string> names() const;
    size_t size() const { return params_.size(); }

    void zero_grad();
    /// One Adam step (beta1=0.9, beta2=0.999, eps=1e-8) over every parameter,
    /// then zero all gradients.
    void step(double learning_rate);

    /// Deep copy of the current values (grads and Adam state reset).
    ParamStore clone_values() const;
    /// Overwrite values of identically named/shaped params from another store.
    void load_values_from(const ParamStore& other);

    void save(const std::string& path) const;
    static ParamStore load(const std::string& path);

    static constexpr const char* kMagic = "EENR-CKPT";
    static constexpr int kVersion = 1;

private:
    struct AdamState {
        std::vector<double> m;
        std::vector<double> v;
        int64_t t = 0;
    };

    Tensor insert(const std::string& name, Tensor t);

    std::map<std::string, Tensor> params_;
    std::map<std::string, AdamState> adam_;
};

}  // namespace eenr
