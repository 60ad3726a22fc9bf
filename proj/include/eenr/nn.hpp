#pragma once

#include <string>
#include <vector>

#include "eenr/param_store.hpp"
#include "eenr/tensor.hpp"

namespace eenr {

/// Gated recurrent cell parameters. Gate blocks are packed [update, reset,
/// candidate] along the 3h axis; input projections apply as x * wx so wx is
/// (in_dim x 3h).
struct GruParams {
    Tensor wx;  // (in_dim x 3h)
    Tensor wh;  // (hidden x 3h)
    Tensor b;   // (3h)
    int hidden = 0;
};

GruParams make_gru(ParamStore& store, const std::string& prefix, int in_dim, int hidden,
                   Rng& rng);

/// Runs the cell over an embedded sequence (n x in_dim). The result holds one
/// hidden state per token, indexed by token position regardless of direction;
/// reverse=true scans right-to-left (so the "final" state is at index 0).
std::vector<Tensor> gru_run(const GruParams& gru, const Tensor& seq, bool reverse);

}  // namespace eenr
