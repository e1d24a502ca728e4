#pragma once

#include <string>

#include "maem/mlp.hpp"

namespace maem {

// Checkpoint file layout (documented in README):
//   line 1: "maemlab-checkpoint v1"
//   line 2: "generator <w0> <w1> ... <hidden_act> <output_act>"
//   line 3: "discriminator <w0> ... <hidden_act> <output_act>"
//   line 4: "doubles <count>"
//   then <count> raw little-endian IEEE-754 float64 values: all generator
//   parameters (W row-major then bias, layer by layer) followed by all
//   discriminator parameters in the same order.
void save_checkpoint(const std::string& path, const Generator& gen,
                     const Discriminator& disc);

struct Checkpoint {
  Generator gen;
  Discriminator disc;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace maem
