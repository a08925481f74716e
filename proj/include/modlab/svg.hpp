#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace modlab {

/// Per-epoch median loss with its inter-quartile band.
struct LossBand {
  std::string label;
  std::vector<double> median;
  std::vector<double> q25;
  std::vector<double> q75;
};

/// Columns: epoch, then <label>_median,<label>_q25,<label>_q75 per band.
void write_band_csv(std::ostream& os, const std::vector<LossBand>& bands);
std::vector<LossBand> read_band_csv(std::istream& is);

/// Log-scale line chart of the medians over shaded IQR bands.
void write_loss_svg(std::ostream& os, const std::vector<LossBand>& bands, const std::string& title);

}  // namespace modlab
