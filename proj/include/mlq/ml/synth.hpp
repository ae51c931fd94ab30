#pragma once

#include <string>
#include <vector>

namespace mlq::ml {

// Deterministic synthetic datasets (headerless CSV text, byte-identical per
// (preset, seed, rows)). Presets:
//   smarthome-classify  9 appliance loads + aggregate + washer-dryer state label
//   smarthome-cluster   9 appliance loads + aggregate (no label)
//   smarthome-regress   9 appliance loads + aggregate + washer-dryer draw target
//   line                x, y with y = 2x + 1 (noiseless)
//   separable-2d        two well-separated blobs, binary label
// `timestamps` prepends a `dd-mm-yyyy HH:MM:SS` column advancing 8 s per row.
std::string gen_synthetic(const std::string& preset, long long seed, std::size_t rows,
                          bool timestamps = false);

const std::vector<std::string>& synthetic_presets();

// Column index of the washer-dryer load in the smarthome presets (the signal
// behind the classify label / cluster structure / regress target).
inline constexpr std::size_t kWasherColumn = 8;

} // namespace mlq::ml
