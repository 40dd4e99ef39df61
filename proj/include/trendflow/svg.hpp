#pragma once

#include <sstream>
#include <string>
#include <vector>

namespace trendflow {

// Minimal deterministic SVG assembler; coordinates are written with fixed
// precision so identical inputs produce identical bytes.
class SvgCanvas {
  public:
    SvgCanvas(double width, double height);

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width, const std::string& dash = "");
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double stroke_width, const std::string& dash = "");
    void circle(double cx, double cy, double r, const std::string& fill,
                const std::string& stroke = "none");
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none");
    void text(double x, double y, const std::string& content, double size,
              const std::string& fill = "#000000");

    std::string str() const;

  private:
    double width_;
    double height_;
    std::ostringstream body_;
};

}  // namespace trendflow
