#include "fatigue/topo_svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fatigue/io_util.hpp"

namespace fatigue::topo {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << v;
  return os.str();
}

// Cold-to-hot blue/white/red map over [0, 1].
std::string colormap(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = static_cast<int>(std::lround(59 + (245 - 59) * u));
    g = static_cast<int>(std::lround(76 + (245 - 76) * u));
    b = static_cast<int>(std::lround(192 + (245 - 192) * u));
  } else {
    const double u = (t - 0.5) / 0.5;
    r = static_cast<int>(std::lround(245 + (180 - 245) * u));
    g = static_cast<int>(std::lround(245 + (4 - 245) * u));
    b = static_cast<int>(std::lround(245 + (38 - 245) * u));
  }
  std::ostringstream os;
  os << "rgb(" << r << ',' << g << ',' << b << ')';
  return os.str();
}

}  // namespace

std::string render_topo_svg(const Montage& eeg_montage,
                            const features::BandClassMeans& means,
                            const std::vector<features::TopoStat>& stats) {
  const int disk_r = 110;
  const int cell = 2 * disk_r + 50;
  const int width = cell * kNumClasses + 40;
  const int height = cell + 90;

  double lo = 1e300, hi = -1e300;
  for (const auto& row : means.means)
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(hi > lo)) hi = lo + 1.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
     << " font-size=\"18\">" << means.band.name << " band (" << fmt(means.band.lo) << "-"
     << fmt(means.band.hi) << " Hz)</text>\n";

  static const char* class_names[kNumClasses] = {"NS", "LF", "HF"};
  for (int c = 0; c < kNumClasses; ++c) {
    const int cx = 20 + cell * c + cell / 2;
    const int cy = 60 + disk_r;
    os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << disk_r
       << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    // Nose tick.
    os << "<path d=\"M " << cx - 10 << ' ' << cy - disk_r + 2 << " L " << cx << ' '
       << cy - disk_r - 12 << " L " << cx + 10 << ' ' << cy - disk_r + 2
       << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << cx << "\" y=\"" << cy + disk_r + 24
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
       << class_names[c] << "</text>\n";
    for (size_t ch = 0; ch < eeg_montage.size(); ++ch) {
      const auto& info = eeg_montage.channel(ch);
      const double px = cx + info.x * disk_r;
      const double py = cy - info.y * disk_r;
      const double t = (means.means[static_cast<size_t>(c)][ch] - lo) / (hi - lo);
      os << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py)
         << "\" r=\"7\" fill=\"" << colormap(t) << "\" stroke=\"black\" stroke-width=\"0.5\">"
         << "<title>" << info.name << "</title></circle>\n";
      if (ch < stats.size() && stats[ch].significant) {
        os << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(py - 9)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\""
           << " fill=\"grey\">*</text>\n";
      }
    }
  }

  // Color scale.
  const int bar_y = height - 26;
  for (int i = 0; i < 100; ++i) {
    os << "<rect x=\"" << 20 + i * 2 << "\" y=\"" << bar_y << "\" width=\"2\" height=\"10\" fill=\""
       << colormap(i / 99.0) << "\"/>\n";
  }
  os.precision(4);
  os << "<text x=\"20\" y=\"" << bar_y - 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
     << lo << "</text>\n";
  os << "<text x=\"220\" y=\"" << bar_y - 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
     << hi << " uV^2</text>\n";
  os << "</svg>\n";
  return os.str();
}

void save_topo_svg(const Montage& eeg_montage, const features::BandClassMeans& means,
                   const std::vector<features::TopoStat>& stats, const std::string& path) {
  io::write_text_file(path, render_topo_svg(eeg_montage, means, stats));
}

}  // namespace fatigue::topo
