#include "trendflow/svg.hpp"

#include <cstdio>

namespace trendflow {

namespace {

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape_text(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

SvgCanvas::SvgCanvas(double width, double height) : width_(width), height_(height) {}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width, const std::string& dash) {
    body_ << "<line x1=\"" << coord(x1) << "\" y1=\"" << coord(y1) << "\" x2=\"" << coord(x2)
          << "\" y2=\"" << coord(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << coord(stroke_width) << "\"";
    if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << "/>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& stroke, double stroke_width,
                         const std::string& dash) {
    if (pts.size() < 2) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << coord(stroke_width) << "\"";
    if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << " points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
        if (i) body_ << " ";
        body_ << coord(pts[i].first) << "," << coord(pts[i].second);
    }
    body_ << "\"/>\n";
}

void SvgCanvas::circle(double cx, double cy, double r, const std::string& fill,
                       const std::string& stroke) {
    body_ << "<circle cx=\"" << coord(cx) << "\" cy=\"" << coord(cy) << "\" r=\"" << coord(r)
          << "\" fill=\"" << fill << "\"";
    if (stroke != "none") body_ << " stroke=\"" << stroke << "\" stroke-width=\"1\"";
    body_ << "/>\n";
}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& stroke) {
    body_ << "<rect x=\"" << coord(x) << "\" y=\"" << coord(y) << "\" width=\"" << coord(w)
          << "\" height=\"" << coord(h) << "\" fill=\"" << fill << "\"";
    if (stroke != "none") body_ << " stroke=\"" << stroke << "\" stroke-width=\"1\"";
    body_ << "/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& content, double size,
                     const std::string& fill) {
    body_ << "<text x=\"" << coord(x) << "\" y=\"" << coord(y) << "\" font-size=\"" << coord(size)
          << "\" font-family=\"sans-serif\" fill=\"" << fill << "\">" << escape_text(content)
          << "</text>\n";
}

std::string SvgCanvas::str() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(width_) << "\" height=\""
        << coord(height_) << "\" viewBox=\"0 0 " << coord(width_) << " " << coord(height_)
        << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << coord(width_) << "\" height=\"" << coord(height_)
        << "\" fill=\"#ffffff\"/>\n";
    out << body_.str();
    out << "</svg>\n";
    return out.str();
}

}  // namespace trendflow
