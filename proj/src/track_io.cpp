#include "ic/track_io.hpp"

#include <fstream>
#include <sstream>

#include "ic/errors.hpp"

namespace ic {

void write_track_csv(const std::string& path, const std::vector<TrackRow>& rows) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os.precision(17);
  os << "# angles in degrees, Z-X-Y right-handed Euler (R = Rz*Rx*Ry); translation in mm; "
        "rz unwrapped over the track\n";
  os << "frame,t_ms,tx_mm,ty_mm,tz_mm,rx_deg,ry_deg,rz_deg,tracked,n_corr,aniso_ratio\n";
  for (const auto& r : rows) {
    os << r.frame << "," << r.t_ms << "," << r.pose.tx << "," << r.pose.ty << "," << r.pose.tz
       << "," << r.pose.rx << "," << r.pose.ry << "," << r.pose.rz << "," << (r.tracked ? 1 : 0)
       << "," << r.n_corr << "," << r.aniso_ratio << "\n";
  }
  if (!os) throw DataError("write failed: " + path);
}

std::vector<TrackRow> read_track_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::vector<TrackRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("frame,", 0) != 0) throw DataError(path + ": missing track header");
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    TrackRow r;
    char comma;
    int tracked;
    ss >> r.frame >> comma >> r.t_ms >> comma >> r.pose.tx >> comma >> r.pose.ty >> comma >>
        r.pose.tz >> comma >> r.pose.rx >> comma >> r.pose.ry >> comma >> r.pose.rz >> comma >>
        tracked >> comma >> r.n_corr >> comma >> r.aniso_ratio;
    if (!ss) throw DataError(path + ": malformed row: " + line);
    r.tracked = tracked != 0;
    rows.push_back(r);
  }
  if (!header_seen) throw DataError(path + ": empty track file");
  return rows;
}

}  // namespace ic
