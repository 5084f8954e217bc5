#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fastmod::svg {
namespace {

constexpr int kOutlineSamples = 96;

std::vector<Vec2> outline(const StarObstacle& obstacle) {
  std::vector<Vec2> out;
  out.reserve(kOutlineSamples);
  const Vec2 ref = obstacle.reference_point();
  for (int i = 0; i < kOutlineSamples; ++i) {
    const double a = 2.0 * kPi * i / kOutlineSamples;
    const Vec2 dir(std::cos(a), std::sin(a));
    out.push_back(ref + obstacle.ray_exit(dir).distance * dir);
  }
  return out;
}

class Canvas {
 public:
  Canvas(const Viewport& view, const Provenance& provenance) : view_(view) {
    const double w = (view.upper.x() - view.lower.x()) * view.pixels_per_meter;
    const double h = (view.upper.y() - view.lower.y()) * view.pixels_per_meter;
    os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os_ << "<!-- " << provenance_line(provenance).substr(2) << " -->\n";
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
        << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n";
    os_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  std::string px(const Vec2& p) const {
    const Vec2 q = map(p);
    return num(q.x()) + "," + num(q.y());
  }

  Vec2 map(const Vec2& p) const {
    return {(p.x() - view_.lower.x()) * view_.pixels_per_meter,
            (view_.upper.y() - p.y()) * view_.pixels_per_meter};
  }

  void polygon(std::span<const Vec2> points, std::string_view fill, std::string_view stroke) {
    os_ << "<polygon points=\"";
    for (const Vec2& p : points) os_ << px(p) << ' ';
    os_ << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
  }

  void polyline(std::span<const Vec2> points, std::string_view stroke, double width) {
    os_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
        << "\" points=\"";
    for (const Vec2& p : points) os_ << px(p) << ' ';
    os_ << "\"/>\n";
  }

  void dot(const Vec2& p, double radius_px, std::string_view fill) {
    const Vec2 q = map(p);
    os_ << "<circle cx=\"" << num(q.x()) << "\" cy=\"" << num(q.y()) << "\" r=\"" << num(radius_px)
        << "\" fill=\"" << fill << "\"/>\n";
  }

  void arrow(const Vec2& from, const Vec2& to, std::string_view stroke) {
    const Vec2 a = map(from);
    const Vec2 b = map(to);
    const Vec2 d = b - a;
    const double len = d.norm();
    if (len < 1e-9) {
      dot(from, 1.0, stroke);
      return;
    }
    const Vec2 u = d / len;
    const Vec2 n(-u.y(), u.x());
    const double head = std::min(4.0, 0.4 * len);
    const Vec2 l = b - head * u + 0.5 * head * n;
    const Vec2 r = b - head * u - 0.5 * head * n;
    os_ << "<path d=\"M" << num(a.x()) << ',' << num(a.y()) << " L" << num(b.x()) << ',' << num(b.y())
        << " M" << num(l.x()) << ',' << num(l.y()) << " L" << num(b.x()) << ',' << num(b.y()) << " L"
        << num(r.x()) << ',' << num(r.y()) << "\" stroke=\"" << stroke
        << "\" stroke-width=\"1\" fill=\"none\"/>\n";
  }

  void cross(const Vec2& p, double size_px, std::string_view stroke) {
    const Vec2 q = map(p);
    os_ << "<path d=\"M" << num(q.x() - size_px) << ',' << num(q.y() - size_px) << " L"
        << num(q.x() + size_px) << ',' << num(q.y() + size_px) << " M" << num(q.x() - size_px) << ','
        << num(q.y() + size_px) << " L" << num(q.x() + size_px) << ',' << num(q.y() - size_px)
        << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n";
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  Viewport view_;
  std::ostringstream os_;
};

void draw_obstacles(Canvas& canvas, const Scenario& scenario, bool analytic_only_tracked) {
  for (const WorldObstacle& w : scenario.obstacles) {
    const bool analytic = scenario.mode == AvoidanceMode::kAnalytic ||
                          (scenario.mode == AvoidanceMode::kMixed && w.tracked);
    if (analytic_only_tracked && !analytic) {
      canvas.polygon(outline(w.obstacle), "#d9d9d9", "#9a9a9a");
    } else if (analytic) {
      canvas.polygon(outline(w.track()), "#c8a27a", "#7a4f26");
    } else {
      canvas.polygon(outline(w.obstacle), "#bdbdbd", "#555555");
    }
  }
}

void draw_markers(Canvas& canvas, const Scenario& scenario) {
  canvas.dot(scenario.start.position(), 4.0, "#1f77b4");
  if (scenario.nominal.attractor) canvas.cross(*scenario.nominal.attractor, 6.0, "black");
}

}  // namespace

Viewport fit_viewport(const Scenario& scenario, double padding) {
  Vec2 lo = scenario.start.position();
  Vec2 hi = lo;
  const auto grow = [&](const Vec2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  if (scenario.nominal.attractor) grow(*scenario.nominal.attractor);
  for (const WorldObstacle& w : scenario.obstacles) {
    for (const Vec2& p : outline(w.obstacle)) grow(p);
  }
  Viewport view;
  view.lower = lo - Vec2::Constant(padding);
  view.upper = hi + Vec2::Constant(padding);
  return view;
}

std::string trajectory_svg(const Scenario& scenario, std::span<const ControlTick> trajectory,
                           const Viewport& view, const Provenance& provenance) {
  Canvas canvas(view, provenance);
  draw_obstacles(canvas, scenario, false);
  std::vector<Vec2> path;
  path.reserve(trajectory.size());
  for (const ControlTick& k : trajectory) path.push_back(k.control_point);
  if (path.size() > 1) canvas.polyline(path, "#d62728", 2.0);
  draw_markers(canvas, scenario);
  return canvas.finish();
}

std::string field_svg(const Scenario& scenario, const FieldGrid& field, const Viewport& view,
                      const Provenance& provenance) {
  Canvas canvas(view, provenance);
  draw_obstacles(canvas, scenario, true);
  for (const Vec2& p : field.scan.points) canvas.dot(p, 1.0, "black");

  const double dx = field.grid.nx > 1
                        ? (field.grid.upper.x() - field.grid.lower.x()) / static_cast<double>(field.grid.nx - 1)
                        : 1.0;
  const double dy = field.grid.ny > 1
                        ? (field.grid.upper.y() - field.grid.lower.y()) / static_cast<double>(field.grid.ny - 1)
                        : 1.0;
  const double cell = 0.8 * std::min(dx, dy);
  double longest = 0.0;
  for (const FieldNode& n : field.nodes) {
    if (!n.inside) longest = std::max(longest, n.velocity.norm());
  }
  for (const FieldNode& n : field.nodes) {
    if (n.inside) {
      canvas.dot(n.position, 1.5, "#d62728");
      continue;
    }
    const Vec2 tip = longest > 0.0 ? n.position + cell * n.velocity / longest : n.position;
    canvas.arrow(n.position, tip, "#1f4e79");
  }
  draw_markers(canvas, scenario);
  return canvas.finish();
}

}  // namespace fastmod::svg
