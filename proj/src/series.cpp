#include "tsens/series.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tsens {

namespace {

bool parse_double(const std::string& text, double& out) {
    const char* begin = text.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

std::string value_field(const std::string& line) {
    // Two-column "date,value" rows: the first column is ignored.
    const std::size_t comma = line.rfind(',');
    return comma == std::string::npos ? line : line.substr(comma + 1);
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    return s.substr(b);
}

} // namespace

double TransformSpec::apply(double v) const {
    switch (kind) {
    case TransformKind::Log10:
        if (!(v > 0.0)) throw TsError("log10 transform requires strictly positive values, got " + std::to_string(v));
        return std::log10(v);
    case TransformKind::LinearRescale:
        return (v - src_min) / (src_max - src_min) * (dst_max - dst_min) + dst_min;
    }
    throw TsError("unknown transform kind");
}

double TransformSpec::invert(double v) const {
    switch (kind) {
    case TransformKind::Log10:
        return std::pow(10.0, v);
    case TransformKind::LinearRescale:
        return (v - dst_min) / (dst_max - dst_min) * (src_max - src_min) + src_min;
    }
    throw TsError("unknown transform kind");
}

void TransformSpec::validate() const {
    if (kind == TransformKind::LinearRescale) {
        if (src_max == src_min) throw TsError("linear-rescale has zero-width source range");
        if (dst_max == dst_min) throw TsError("linear-rescale has zero-width target interval");
    }
}

std::string TransformSpec::describe() const {
    if (kind == TransformKind::Log10) return "log10";
    std::ostringstream os;
    os << "linear-rescale [" << src_min << "," << src_max << "] -> [" << dst_min << "," << dst_max << "]";
    return os.str();
}

TimeSeries load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TsError("cannot open dataset file: " + path);

    TimeSeries series;
    series.name = std::filesystem::path(path).stem().string();

    std::string line;
    std::size_t row = 0;
    bool saw_blank = false;
    while (std::getline(in, line)) {
        ++row;
        const std::string field = trim(value_field(trim(line)));
        if (field.empty()) {
            if (saw_blank) throw TsError("blank row " + std::to_string(row) + " in " + path);
            saw_blank = true; // tolerated only as the single trailing blank line
            continue;
        }
        if (saw_blank) throw TsError("blank row " + std::to_string(row - 1) + " in " + path);
        double v = 0.0;
        if (!parse_double(field, v)) {
            if (row == 1) continue; // header line
            throw TsError("row " + std::to_string(row) + " of " + path + " is not a number: '" + field + "'");
        }
        if (!std::isfinite(v)) throw TsError("row " + std::to_string(row) + " of " + path + " is not finite");
        series.values.push_back(v);
    }
    if (series.values.empty()) throw TsError("empty series in " + path);
    return series;
}

TimeSeries apply_transform(const TimeSeries& series, const TransformSpec& spec) {
    spec.validate();
    TimeSeries out = series;
    for (double& v : out.values) v = spec.apply(v);
    out.transform_log.push_back(spec);
    return out;
}

TimeSeries invert_transform(const TimeSeries& series, const TransformSpec& spec) {
    if (series.transform_log.empty()) throw TsError("invert_transform: transform_log is empty");
    if (!(series.transform_log.back() == spec))
        throw TsError("invert_transform: spec does not match the last applied transform (" +
                      series.transform_log.back().describe() + ")");
    TimeSeries out = series;
    for (double& v : out.values) v = spec.invert(v);
    out.transform_log.pop_back();
    return out;
}

std::vector<double> apply_values(std::span<const double> values, const TransformSpec& spec) {
    spec.validate();
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v = spec.apply(v);
    return out;
}

std::vector<double> invert_values(std::span<const double> values,
                                  std::span<const TransformSpec> transform_log) {
    std::vector<double> out(values.begin(), values.end());
    for (auto it = transform_log.rbegin(); it != transform_log.rend(); ++it)
        for (double& v : out) v = it->invert(v);
    return out;
}

std::array<TimeSeries, 3> split(const TimeSeries& series, const SplitSpec& spec) {
    const std::size_t n = series.size();
    if (spec.train_len < 1 || spec.validation_len < 1 || spec.test_len < 1)
        throw TsError("split: every segment must have length >= 1");
    if (spec.train_len + spec.validation_len + spec.test_len != n)
        throw TsError("split: segment lengths sum to " +
                      std::to_string(spec.train_len + spec.validation_len + spec.test_len) +
                      " but the series has " + std::to_string(n) + " observations");

    auto segment = [&](std::size_t begin, std::size_t len, const char* tag) {
        TimeSeries s;
        s.values.assign(series.values.begin() + begin, series.values.begin() + begin + len);
        s.name = series.name + "." + tag;
        s.transform_log = series.transform_log;
        return s;
    };
    return {segment(0, spec.train_len, "train"),
            segment(spec.train_len, spec.validation_len, "validation"),
            segment(spec.train_len + spec.validation_len, spec.test_len, "test")};
}

PatternSet window(std::span<const double> values, int p, int q) {
    if (p < 1 || q < 1) throw TsError("window: p and q must be >= 1");
    const int n_obs = static_cast<int>(values.size());
    const int n = n_obs - p - q + 1;
    if (n < 1)
        throw TsError("window: series of length " + std::to_string(n_obs) +
                      " is too short for p=" + std::to_string(p) + ", q=" + std::to_string(q));

    PatternSet set;
    set.p = p;
    set.q = q;
    set.n = n;
    set.inputs.reserve(static_cast<std::size_t>(n) * p);
    set.targets.reserve(static_cast<std::size_t>(n) * q);
    for (int i = 0; i < n; ++i) {
        set.inputs.insert(set.inputs.end(), values.begin() + i, values.begin() + i + p);
        set.targets.insert(set.targets.end(), values.begin() + i + p, values.begin() + i + p + q);
    }
    return set;
}

PatternSet window(const TimeSeries& series, int p, int q) {
    return window(std::span<const double>(series.values), p, q);
}

ErrorTriple metrics(std::span<const double> actual, std::span<const double> forecast) {
    if (actual.size() != forecast.size())
        throw TsError("metrics: length mismatch (" + std::to_string(actual.size()) + " vs " +
                      std::to_string(forecast.size()) + ")");
    if (actual.empty()) throw TsError("metrics: empty sequences");

    ErrorTriple e;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - forecast[i];
        e.mae += std::abs(d);
        e.mse += d * d;
        if (actual[i] == 0.0) throw TsError("metrics: MAPE undefined, actual[" + std::to_string(i) + "] is zero");
        e.mape += std::abs(d / actual[i]);
    }
    const double n = static_cast<double>(actual.size());
    e.mae /= n;
    e.mse /= n;
    e.mape = e.mape / n * 100.0;
    return e;
}

} // namespace tsens
