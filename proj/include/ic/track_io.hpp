#pragma once

#include <string>
#include <vector>

#include "ic/pose.hpp"

namespace ic {

/// Pose-track CSV: header comment documenting the angle convention, then
/// `frame,t_ms,tx_mm,ty_mm,tz_mm,rx_deg,ry_deg,rz_deg,tracked,n_corr,aniso_ratio`.
/// Doubles are written with 17 significant digits so round-trips are exact.
void write_track_csv(const std::string& path, const std::vector<TrackRow>& rows);
std::vector<TrackRow> read_track_csv(const std::string& path);

}  // namespace ic
