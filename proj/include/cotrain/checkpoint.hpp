#pragma once

// Checkpoint file: one JSON header line {"layer_dims":[...],"seed":N}
// followed by the parameters as little-endian 64-bit floats in the order
// w0, b0, w1, b1, ... (row-major weights).

#include <filesystem>
#include <vector>

#include "cotrain/view_model.hpp"

namespace cotrain {

void save_checkpoint(const ViewModel& model, const std::filesystem::path& path);
/// Throws IoError naming the file on any read or format problem.
ViewModel load_checkpoint(const std::filesystem::path& path);

/// view_0.ckpt, view_1.ckpt, ... inside `dir`.
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t view);
void save_checkpoints(const std::vector<const ViewModel*>& views, const std::filesystem::path& dir);
/// Loads view_0.ckpt upward until the first missing index; at least one required.
std::vector<ViewModel> load_checkpoints(const std::filesystem::path& dir);

}  // namespace cotrain
