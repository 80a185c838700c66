#include "veason/evalmetrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "veason/errors.hpp"

namespace veason {

double region_similarity(const MaskSequence& pred, const MaskSequence& gt) {
    if (pred.size() != gt.size() || gt.empty())
        throw ValidationError("region_similarity: sequence length mismatch");
    double sum = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) sum += mask_iou(pred[t], gt[t]);
    return sum / static_cast<double>(gt.size());
}

double contour_accuracy(const MaskSequence& pred, const MaskSequence& gt, int tol) {
    if (pred.size() != gt.size() || gt.empty())
        throw ValidationError("contour_accuracy: sequence length mismatch");
    double sum = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) sum += boundary_fscore(pred[t], gt[t], tol);
    return sum / static_cast<double>(gt.size());
}

std::optional<double> robustness(const std::vector<MaskSequence>& negative_predictions) {
    if (negative_predictions.empty()) return std::nullopt;
    double sum = 0;
    for (const MaskSequence& seq : negative_predictions) {
        long long fg = 0, total = 0;
        for (const BinaryMask& m : seq) {
            fg += mask_area(m);
            total += static_cast<long long>(m.width) * m.height;
        }
        sum += fg == 0 ? 1.0 : 1.0 - static_cast<double>(fg) / static_cast<double>(total);
    }
    return 100.0 * sum / static_cast<double>(negative_predictions.size());
}

EvalReport evaluate(const Dataset& ds, const Predictions& predictions) {
    for (const auto& [id, seq] : predictions) {
        bool known = false;
        for (const Sample& s : ds.samples) known |= s.sample_id == id;
        if (!known) throw ValidationError("evaluate: unknown sample_id in predictions: " + id);
    }

    EvalReport report;
    report.note =
        "Robustness uses this tool's rejection formula; values are not comparable across tools.";
    int tol = default_boundary_tolerance(ds.config.width, ds.config.height);
    std::vector<MaskSequence> negative_preds;

    for (const Sample& s : ds.samples) {
        SampleMetrics m;
        m.sample_id = s.sample_id;
        m.subset = s.subset;
        auto it = predictions.find(s.sample_id);
        if (it != predictions.end()) {
            const MaskSequence& pred = it->second;
            if (static_cast<int>(pred.size()) != s.gt.frame_count())
                throw ValidationError("evaluate: prediction for " + s.sample_id +
                                      " has wrong frame count");
            for (const BinaryMask& mask : pred)
                if (mask.width != ds.config.width || mask.height != ds.config.height)
                    throw ValidationError("evaluate: prediction for " + s.sample_id +
                                          " has wrong dimensions");
            m.j = 100.0 * region_similarity(pred, s.gt.merged_masks);
            m.f = 100.0 * contour_accuracy(pred, s.gt.merged_masks, tol);
        }
        m.jf = (m.j + m.f) / 2.0;
        if (s.negative()) {
            ++report.negative_count;
            // A missing prediction predicts nothing, which is a clean rejection.
            negative_preds.push_back(it != predictions.end()
                                         ? it->second
                                         : MaskSequence(s.gt.frame_count(),
                                                        BinaryMask(ds.config.width,
                                                                   ds.config.height)));
        } else {
            for (const char* key : {m.subset.c_str(), "overall"}) {
                SubsetAggregate& agg = report.subsets[key];
                agg.j += m.j;
                agg.f += m.f;
                ++agg.count;
            }
        }
        report.per_sample.push_back(std::move(m));
    }

    for (auto& [name, agg] : report.subsets) {
        if (agg.count > 0) {
            agg.j /= agg.count;
            agg.f /= agg.count;
        }
        agg.jf = (agg.j + agg.f) / 2.0;
    }
    report.robustness_r = robustness(negative_preds);
    return report;
}

void write_predictions(const std::vector<std::pair<std::string, MaskSequence>>& predictions,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& [id, seq] : predictions) {
        nlohmann::ordered_json j;
        j["sample_id"] = id;
        auto masks = nlohmann::ordered_json::array();
        for (const BinaryMask& m : seq) {
            RleMask r = rle_encode(m);
            nlohmann::ordered_json jm;
            jm["w"] = r.width;
            jm["h"] = r.height;
            jm["counts"] = r.counts;
            masks.push_back(std::move(jm));
        }
        j["masks"] = std::move(masks);
        out << j.dump() << "\n";
    }
}

Predictions load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    Predictions out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ValidationError("predictions: invalid JSON line");
        try {
            std::string id = j.at("sample_id").get<std::string>();
            MaskSequence seq;
            for (const auto& jm : j.at("masks")) {
                RleMask r;
                r.width = jm.at("w").get<int>();
                r.height = jm.at("h").get<int>();
                for (const auto& c : jm.at("counts")) r.counts.push_back(c.get<std::uint64_t>());
                seq.push_back(rle_decode(r));
            }
            out[id] = std::move(seq);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("predictions: ") + e.what());
        }
    }
    return out;
}

std::string render_report(const EvalReport& report) {
    std::ostringstream out;
    char buf[160];
    out << "subset        n       J       F     J&F\n";
    for (const char* name : {"referring", "reasoning", "overall"}) {
        auto it = report.subsets.find(name);
        if (it == report.subsets.end()) continue;
        std::snprintf(buf, sizeof buf, "%-10s %4d  %6.1f  %6.1f  %6.1f\n", name, it->second.count,
                      it->second.j, it->second.f, it->second.jf);
        out << buf;
    }
    if (report.robustness_r) {
        std::snprintf(buf, sizeof buf, "R over %d negative samples: %.1f\n",
                      report.negative_count, *report.robustness_r);
        out << buf;
    }
    out << "note: " << report.note << "\n";
    return out.str();
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["note"] = report.note;
    nlohmann::ordered_json subsets;
    for (const auto& [name, agg] : report.subsets) {
        subsets[name] = {{"j", agg.j}, {"f", agg.f}, {"jf", agg.jf}, {"count", agg.count}};
    }
    j["subsets"] = std::move(subsets);
    if (report.robustness_r)
        j["robustness"] = *report.robustness_r;
    else
        j["robustness"] = nullptr;
    j["negative_count"] = report.negative_count;
    auto rows = nlohmann::ordered_json::array();
    for (const SampleMetrics& m : report.per_sample) {
        rows.push_back({{"sample_id", m.sample_id},
                        {"subset", m.subset},
                        {"j", m.j},
                        {"f", m.f},
                        {"jf", m.jf}});
    }
    j["per_sample"] = std::move(rows);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(1) << "\n";
}

}  // namespace veason
