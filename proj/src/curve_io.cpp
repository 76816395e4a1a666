#include "guessbound/curve_io.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace guessbound {

namespace {

constexpr const char* kHeader = "g,value,raw_value,kind,method,delta,target,provenance";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

std::string curve_to_csv(const std::vector<GuessingCurve>& curves) {
    std::ostringstream out;
    out << kHeader << "\n";
    for (const auto& curve : curves) {
        for (const auto& pt : curve.points) {
            out << pt.g << ',' << format_double(pt.value) << ','
                << format_double(pt.raw_value) << ',' << to_string(pt.kind) << ','
                << to_string(pt.method) << ',' << format_double(pt.delta) << ','
                << to_string(pt.target) << ',' << pt.provenance << "\n";
        }
    }
    return out.str();
}

std::vector<GuessingCurve> curves_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("g,value,raw_value", 0) != 0)
        throw std::runtime_error("unexpected CSV header: " + line);

    // Group rows by (method, kind, target) while preserving first-seen order.
    std::vector<GuessingCurve> curves;
    std::map<std::string, std::size_t> index;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 7)
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": expected at least 7 CSV fields");
        BoundPoint pt;
        pt.g = std::stoull(fields[0]);
        pt.value = std::stod(fields[1]);
        pt.raw_value = std::stod(fields[2]);
        pt.kind = bound_kind_from_string(fields[3]);
        pt.method = bound_method_from_string(fields[4]);
        pt.delta = std::stod(fields[5]);
        pt.target = bound_target_from_string(fields[6]);
        if (fields.size() > 7) pt.provenance = fields[7];

        const std::string key =
            std::string(to_string(pt.method)) + "/" + to_string(pt.kind) + "/" +
            to_string(pt.target);
        auto it = index.find(key);
        if (it == index.end()) {
            index[key] = curves.size();
            curves.push_back(GuessingCurve{{}, key});
            it = index.find(key);
        }
        curves[it->second].points.push_back(std::move(pt));
    }
    return curves;
}

std::string curve_to_json(const std::vector<GuessingCurve>& curves) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& curve : curves) {
        nlohmann::json jc;
        jc["provenance"] = curve.provenance;
        jc["points"] = nlohmann::json::array();
        for (const auto& pt : curve.points) {
            jc["points"].push_back({{"g", pt.g},
                                    {"value", pt.value},
                                    {"raw_value", pt.raw_value},
                                    {"kind", to_string(pt.kind)},
                                    {"method", to_string(pt.method)},
                                    {"delta", pt.delta},
                                    {"target", to_string(pt.target)},
                                    {"provenance", pt.provenance}});
        }
        j.push_back(std::move(jc));
    }
    return j.dump(2);
}

}  // namespace guessbound
