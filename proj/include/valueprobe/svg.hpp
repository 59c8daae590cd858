#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>

namespace valueprobe::svg {

inline std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Minimal deterministic SVG builder; coordinates are emitted with fixed
// precision so output files are diffable.
class Document {
 public:
  Document(double width, double height) : width_(width), height_(height) {}

  void comment(std::string_view text) {
    body_ << "<!-- " << escape(text) << " -->\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke = "#444",
            double stroke_width = 1.0) {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
          << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << num(stroke_width) << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, std::string_view fill) {
    body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
          << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"/>\n";
  }

  void circle(double cx, double cy, double r, std::string_view fill,
              std::string_view stroke = "none", double stroke_width = 1.0) {
    body_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
          << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << num(stroke_width) << "\"/>\n";
  }

  void text(double x, double y, std::string_view content, double size = 12.0,
            std::string_view anchor = "start", std::string_view fill = "#222") {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\"" << fill
          << "\">" << escape(content) << "</text>\n";
  }

  std::string render() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\""
        << num(height_) << "\" viewBox=\"0 0 " << num(width_) << " " << num(height_) << "\">\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double width_;
  double height_;
  std::ostringstream body_;
};

}  // namespace valueprobe::svg
