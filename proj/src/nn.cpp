#include "eenr/nn.hpp"

#include <stdexcept>

namespace eenr {

GruParams make_gru(ParamStore& store, const std::string& prefix, int in_dim, int hidden,
                   Rng& rng) {
    GruParams gru;
    gru.wx = store.param(prefix + ".wx", {in_dim, 3 * hidden}, rng);
    gru.wh = store.param(prefix + ".wh", {hidden, 3 * hidden}, rng);
    gru.b = store.param_const(prefix + ".b", {3 * hidden}, 0.0);
    gru.hidden = hidden;
    return gru;
}

std::vector<Tensor> gru_run(const GruParams& gru, const Tensor& seq, bool reverse) {
    if (seq.ndim() != 2 || seq.dim(1) != gru.wx.dim(0)) {
        throw std::invalid_argument("gru_run: sequence shape " + shape_str(seq.shape()) +
                                    " does not match input dim " + std::to_string(gru.wx.dim(0)));
    }
    int n = seq.dim(0);
    int h = gru.hidden;
    Tensor projected = add(matmul(seq, gru.wx), gru.b);  // (n x 3h)

    std::vector<Tensor> states(static_cast<size_t>(n));
    Tensor prev = Tensor::zeros({h});
    for (int step = 0; step < n; ++step) {
        int t = reverse ? n - 1 - step : step;
        Tensor s = row(projected, t);
        Tensor u = matmul(prev, gru.wh);  // (3h)
        Tensor z = sigmoid(add(slice(s, 0, h), slice(u, 0, h)));
        Tensor r = sigmoid(add(slice(s, h, h), slice(u, h, h)));
        Tensor cand = tanh(add(slice(s, 2 * h, h), mul(r, slice(u, 2 * h, h))));
        prev = add(mul(z, prev), mul(affine(z, -1.0, 1.0), cand));
        states[static_cast<size_t>(t)] = prev;
    }
    return states;
}

}  // namespace eenr
