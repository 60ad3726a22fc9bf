#include "eenr/param_store.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace eenr {

using nlohmann::json;

Tensor ParamStore::insert(const std::string& name, Tensor t) {
    if (params_.count(name)) {
        throw std::invalid_argument("ParamStore: duplicate parameter name '" + name + "'");
    }
    params_.emplace(name, t);
    AdamState st;
    st.m.assign(t.values().size(), 0.0);
    st.v.assign(t.values().size(), 0.0);
    adam_.emplace(name, std::move(st));
    return t;
}

Tensor ParamStore::param(const std::string& name, std::vector<int> shape, Rng& rng) {
    int fan_in = shape.size() == 2 ? shape[0] : (shape.empty() ? 1 : shape[0]);
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    return param_uniform(name, std::move(shape), -bound, bound, rng);
}

Tensor ParamStore::param_uniform(const std::string& name, std::vector<int> shape, double lo,
                                 double hi, Rng& rng) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    std::vector<double> vals(static_cast<size_t>(n));
    for (auto& v : vals) v = rng.uniform(lo, hi);
    return insert(name, Tensor::from(std::move(vals), std::move(shape), /*requires_grad=*/true));
}

Tensor ParamStore::param_const(const std::string& name, std::vector<int> shape, double v) {
    return insert(name, Tensor::full(std::move(shape), v, /*requires_grad=*/true));
}

Tensor ParamStore::param_values(const std::string& name, std::vector<int> shape,
                                std::vector<double> values) {
    return insert(name, Tensor::from(std::move(values), std::move(shape), /*requires_grad=*/true));
}

Tensor ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) {
        throw std::invalid_argument("ParamStore: no parameter named '" + name + "'");
    }
    return it->second;
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& [k, v] : params_) out.push_back(k);
    return out;
}

void ParamStore::zero_grad() {
    for (auto& [name, t] : params_) {
        auto& g = t.grad();
        std::fill(g.begin(), g.end(), 0.0);
    }
}

void ParamStore::step(double learning_rate) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    for (auto& [name, t] : params_) {
        auto& st = adam_[name];
        auto& vals = t.values();
        auto& grads = t.grad();
        if (grads.empty()) continue;
        st.t += 1;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
        for (size_t i = 0; i < vals.size(); ++i) {
            double g = grads[i];
            st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * g;
            st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * g * g;
            double mhat = st.m[i] / bc1;
            double vhat = st.v[i] / bc2;
            vals[i] -= learning_rate * mhat / (std::sqrt(vhat) + eps);
        }
        std::fill(grads.begin(), grads.end(), 0.0);
    }
}

ParamStore ParamStore::clone_values() const {
    ParamStore out;
    for (const auto& [name, t] : params_) {
        out.insert(name, Tensor::from(t.values(), t.shape(), /*requires_grad=*/true));
    }
    return out;
}

void ParamStore::load_values_from(const ParamStore& other) {
    for (auto& [name, t] : params_) {
        if (!other.has(name)) continue;
        Tensor src = other.get(name);
        if (src.shape() != t.shape()) {
            throw std::invalid_argument("ParamStore: shape mismatch for '" + name + "'");
        }
        t.values() = src.values();
    }
}

void ParamStore::save(const std::string& path) const {
    json j;
    j["magic"] = kMagic;
    j["version"] = kVersion;
    json params = json::object();
    json adam = json::object();
    for (const auto& [name, t] : params_) {
        params[name] = {{"shape", t.shape()}, {"values", t.values()}};
        const auto& st = adam_.at(name);
        adam[name] = {{"m", st.m}, {"v", st.v}, {"t", st.t}};
    }
    j["params"] = std::move(params);
    j["adam"] = std::move(adam);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("ParamStore::save: cannot open " + path);
    out << j.dump();
    out << "\n";
}

ParamStore ParamStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ParamStore::load: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("ParamStore::load: " + path + " is not valid JSON: " + e.what());
    }
    if (!j.contains("magic") || j["magic"] != kMagic) {
        throw std::runtime_error("ParamStore::load: " + path + " missing magic header '" +
                                 kMagic + "'");
    }
    if (j.value("version", -1) != kVersion) {
        throw std::runtime_error("ParamStore::load: unsupported checkpoint version in " + path);
    }
    ParamStore store;
    for (auto& [name, entry] : j["params"].items()) {
        std::vector<int> shape = entry["shape"].get<std::vector<int>>();
        std::vector<double> values = entry["values"].get<std::vector<double>>();
        store.insert(name, Tensor::from(std::move(values), std::move(shape), true));
    }
    if (j.contains("adam")) {
        for (auto& [name, entry] : j["adam"].items()) {
            if (!store.adam_.count(name)) continue;
            auto& st = store.adam_[name];
            st.m = entry["m"].get<std::vector<double>>();
            st.v = entry["v"].get<std::vector<double>>();
            st.t = entry["t"].get<int64_t>();
        }
    }
    return store;
}

}  // namespace eenr
