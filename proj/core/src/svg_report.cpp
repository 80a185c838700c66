#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "veason/commands.hpp"

namespace veason {

namespace {

struct Panel {
    const char* id;
    const char* title;
    std::vector<double> values;
};

constexpr int kPanelWidth = 280;
constexpr int kPanelHeight = 200;
constexpr int kMargin = 40;

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void render_panel(std::string& out, const Panel& panel, int index) {
    int x0 = kMargin + index * (kPanelWidth + kMargin);
    int y0 = kMargin;
    double lo = *std::min_element(panel.values.begin(), panel.values.end());
    double hi = *std::max_element(panel.values.begin(), panel.values.end());
    double span = hi - lo;

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" "
                  "stroke=\"#888\"/>\n",
                  x0, y0, kPanelWidth, kPanelHeight);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"13\" font-family=\"sans-serif\">%s</text>\n",
                  x0, y0 - 10, panel.title);
    out += buf;

    std::string points;
    std::size_t n = panel.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        double fx = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
        double fy = span == 0 ? 0.5 : (panel.values[i] - lo) / span;
        double px = x0 + fx * kPanelWidth;
        double py = y0 + (1.0 - fy) * kPanelHeight;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
        points += buf;
    }
    if (!points.empty()) points.pop_back();
    out += "<polyline id=\"" + std::string(panel.id) + "\" fill=\"none\" stroke=\"#1f6fb2\" " +
           "stroke-width=\"1.5\" points=\"" + points + "\"/>\n";

    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"10\" font-family=\"sans-serif\">max "
                  "%s</text>\n",
                  x0 + 4, y0 + 12, format_number(hi).c_str());
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"10\" font-family=\"sans-serif\">min "
                  "%s</text>\n",
                  x0 + 4, y0 + kPanelHeight - 4, format_number(lo).c_str());
    out += buf;
}

}  // namespace

std::string render_curves_svg(std::span<const StepStats> stats) {
    Panel panels[3] = {{"reward", "mean reward", {}},
                       {"kl", "KL divergence", {}},
                       {"actions", "mean response actions", {}}};
    for (const StepStats& s : stats) {
        panels[0].values.push_back(s.mean_reward);
        panels[1].values.push_back(s.kl);
        panels[2].values.push_back(s.mean_response_actions);
    }

    int width = 3 * kPanelWidth + 4 * kMargin;
    int height = kPanelHeight + 2 * kMargin;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n",
                  width, height, width, height);
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += buf;
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int i = 0; i < 3; ++i) render_panel(out, panels[i], i);
    out += "</svg>\n";
    return out;
}

}  // namespace veason
