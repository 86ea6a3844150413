// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cbcd/nn.hpp"

namespace cbcd {

/// The trained bundle: three sub-networks, one per reconstruction target.
struct DemosaicModel {
    NetworkSpec spec_g, spec_gr, spec_gb;
    NetworkWeights w_g, w_gr, w_gb;
    std::uint16_t version = 1;

    const NetworkSpec& spec(Subnet s) const;
    const NetworkWeights& weights(Subnet s) const;
    void set(Subnet s, NetworkSpec spec, NetworkWeights weights);

    /// Default architectures with all-zero weights (demosaicking collapses
    /// to the clipped HQLI reconstruction).
    static DemosaicModel zero_default();
};

/// Binary model file. Layout, little-endian throughout:
///   magic "CBCD"; version u16; three records in order g, gr, gb.
///   record: name tag u8 (0 g, 1 gr, 2 gb); input channels u16; width u16;
///           layer count u16; per layer { kind u8; Cin u16; Cout u16;
///           dilation u8; skip count u8; skip indices u16[] };
///           then all weights as float32 in declaration order: per layer,
///           conv kernel row-major [3][3][Cin][Cout], bias [Cout], and for
///           BN layers gamma, beta, mean, var (each [Cout]).
/// Write -> read -> write round-trips are byte-identical.
void save_model(const std::string& path, const DemosaicModel& model);
DemosaicModel load_model(const std::string& path);

/// ADAM state sidecar written next to training checkpoints (same float32
/// encoding; first/second moments for every trainable array plus the step
/// counter).
struct OptimizerState;
void save_optimizer_state(const std::string& path, const OptimizerState& state);
OptimizerState load_optimizer_state(const std::string& path, const NetworkSpec& spec);

}  // namespace cbcd
