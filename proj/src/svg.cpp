#include "modlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace modlab {

void write_band_csv(std::ostream& os, const std::vector<LossBand>& bands) {
  std::size_t epochs = 0;
  os << "epoch";
  for (const auto& b : bands) {
    if (b.q25.size() != b.median.size() || b.q75.size() != b.median.size()) {
      throw std::invalid_argument("band columns differ in length");
    }
    epochs = std::max(epochs, b.median.size());
    os << fmt::format(",{0}_median,{0}_q25,{0}_q75", b.label);
  }
  os << '\n';
  for (std::size_t e = 0; e < epochs; ++e) {
    os << e;
    for (const auto& b : bands) {
      if (e < b.median.size()) {
        os << fmt::format(",{:.17g},{:.17g},{:.17g}", b.median[e], b.q25[e], b.q75[e]);
      } else {
        os << ",,,";
      }
    }
    os << '\n';
  }
}

std::vector<LossBand> read_band_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("band CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "epoch" || (header.size() - 1) % 3 != 0) {
    throw std::runtime_error("band CSV header must be epoch followed by triples");
  }
  std::vector<LossBand> bands((header.size() - 1) / 3);
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const std::string& h = header[1 + 3 * b];
    const auto cut = h.rfind("_median");
    if (cut == std::string::npos) throw std::runtime_error("band CSV column is not a median: " + h);
    bands[b].label = h.substr(0, cut);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(header.size());
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (cells[1 + 3 * b].empty()) continue;
      bands[b].median.push_back(std::stod(cells[1 + 3 * b]));
      bands[b].q25.push_back(std::stod(cells[2 + 3 * b]));
      bands[b].q75.push_back(std::stod(cells[3 + 3 * b]));
    }
  }
  return bands;
}

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr std::size_t kMaxVertices = 800;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::vector<std::size_t> thin(std::size_t n) {
  std::vector<std::size_t> idx;
  const std::size_t stride = std::max<std::size_t>(1, (n + kMaxVertices - 1) / kMaxVertices);
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  if (n > 0 && idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

}  // namespace

void write_loss_svg(std::ostream& os, const std::vector<LossBand>& bands, const std::string& title) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::size_t epochs = 1;
  for (const auto& b : bands) {
    epochs = std::max(epochs, b.median.size());
    for (std::size_t e = 0; e < b.median.size(); ++e) {
      for (double v : {b.q25[e], b.median[e], b.q75[e]}) {
        if (v > 0.0 && std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
  }
  if (!(hi > 0.0)) {
    lo = 1e-3;
    hi = 1.0;
  }
  const double dlo = std::floor(std::log10(lo));
  const double dhi = std::max(dlo + 1.0, std::ceil(std::log10(hi)));
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const double xmax = static_cast<double>(std::max<std::size_t>(epochs - 1, 1));
  auto px = [&](std::size_t e) { return kLeft + pw * static_cast<double>(e) / xmax; };
  auto py = [&](double v) {
    const double l = std::log10(std::max(v, std::pow(10.0, dlo)));
    return kTop + ph * (dhi - l) / (dhi - dlo);
  };

  os << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                    kWidth, kHeight, kWidth, kHeight);
  os << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  os << fmt::format("<text x=\"{:.1f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                    kLeft + pw / 2, title);
  for (int d = static_cast<int>(dlo); d <= static_cast<int>(dhi); ++d) {
    const double y = py(std::pow(10.0, d));
    os << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", kLeft, y,
                      kLeft + pw, y);
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e{}</text>\n",
                      kLeft - 6, y + 4, d);
  }
  for (int k = 0; k <= 4; ++k) {
    const auto e = static_cast<std::size_t>(std::llround(xmax * k / 4.0));
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                      px(e), kTop + ph + 18, e);
  }
  os << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft, kTop,
                    pw, ph);
  os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">epoch</text>\n",
                    kLeft + pw / 2, kHeight - 10);
  os << fmt::format("<text x=\"16\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                    "transform=\"rotate(-90 16 {:.1f})\">H1 loss</text>\n",
                    kTop + ph / 2, kTop + ph / 2);

  for (std::size_t b = 0; b < bands.size(); ++b) {
    const auto& band = bands[b];
    const char* color = kColors[b % std::size(kColors)];
    const auto idx = thin(band.median.size());
    if (idx.empty()) continue;
    std::string area;
    for (std::size_t i : idx) area += fmt::format("{:.2f},{:.2f} ", px(i), py(band.q75[i]));
    for (auto it = idx.rbegin(); it != idx.rend(); ++it) area += fmt::format("{:.2f},{:.2f} ", px(*it), py(band.q25[*it]));
    os << fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n", area, color);
    std::string line;
    for (std::size_t i : idx) line += fmt::format("{:.2f},{:.2f} ", px(i), py(band.median[i]));
    os << fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", line, color);
    const double ly = kTop + 16.0 + 20.0 * static_cast<double>(b);
    os << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                      kLeft + pw + 12, ly, kLeft + pw + 32, ly, color);
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                      kLeft + pw + 38, ly + 4, band.label);
  }
  os << "</svg>\n";
}

}  // namespace modlab
