#pragma once

#include <string>
#include <vector>

#include "fatigue/core_types.hpp"
#include "fatigue/features.hpp"

namespace fatigue::topo {

// One SVG per band: three head disks (NS / LF / HF) with channel dots
// colored by mean band power on a shared scale, grey asterisks over
// channels whose class difference is significant (p < 0.05).
std::string render_topo_svg(const Montage& eeg_montage,
                            const features::BandClassMeans& means,
                            const std::vector<features::TopoStat>& stats);

void save_topo_svg(const Montage& eeg_montage, const features::BandClassMeans& means,
                   const std::vector<features::TopoStat>& stats, const std::string& path);

}  // namespace fatigue::topo
