#include "fmda/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fmda/errors.hpp"
#include "fmda/rng.hpp"

namespace fmda {

namespace {

constexpr double kDegreesPerSeverity = 15.0;
constexpr double kScalePerSeverity = 0.2;

std::vector<double> random_unit(std::size_t dim, RngStream& rng) {
    std::vector<double> v(dim);
    double norm = 0.0;
    while (norm < 1e-6) {
        for (double& x : v) x = rng.normal();
        norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    }
    for (double& x : v) x /= norm;
    return v;
}

/// Rotation by `angle` inside span(u, v), where u and v are orthonormal.
Matrix plane_rotation(const std::vector<double>& u, const std::vector<double>& v, double angle) {
    const std::size_t d = u.size();
    Matrix r = Matrix::identity(d);
    const double c = std::cos(angle) - 1.0;
    const double s = std::sin(angle);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            r(i, j) += c * (u[i] * u[j] + v[i] * v[j]) + s * (v[i] * u[j] - u[i] * v[j]);
        }
    }
    return r;
}

LabeledDataset empty_dataset(Domain domain, std::size_t dim, std::size_t rows) {
    LabeledDataset d;
    d.domain = domain;
    d.features = Matrix(rows, dim);
    d.labels.reserve(rows);
    d.ids.reserve(rows);
    return d;
}

}  // namespace

void ShiftSpec::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("shift spec: " + what); };
    if (num_classes < 2) fail("num_classes must be >= 2");
    if (dim < 2) fail("dim must be >= 2");
    if (source_per_class < 1) fail("source_per_class must be >= 1");
    if (target_per_class < 1) fail("target_per_class must be >= 1");
    if (!(severity >= 0.0) || !std::isfinite(severity)) fail("severity must be finite and >= 0");
    if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) fail("noise_scale must be finite and > 0");
    if (!(mean_scale > 0.0) || !std::isfinite(mean_scale)) fail("mean_scale must be finite and > 0");
}

ShiftSpec ShiftSpec::standard() { return ShiftSpec{}; }

nlohmann::json to_json(const ShiftSpec& s) {
    return {{"num_classes", s.num_classes},
            {"dim", s.dim},
            {"source_per_class", s.source_per_class},
            {"target_per_class", s.target_per_class},
            {"severity", s.severity},
            {"noise_scale", s.noise_scale},
            {"mean_scale", s.mean_scale},
            {"data_seed", s.seed}};
}

const std::vector<std::string>& shift_spec_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        const nlohmann::json defaults = to_json(ShiftSpec{});
        for (const auto& [key, _] : defaults.items()) k.push_back(key);
        return k;
    }();
    return keys;
}

ShiftSpec shift_spec_from_json(const nlohmann::json& j, ShiftSpec s) {
    if (!j.is_object()) throw ConfigError("shift spec: expected a JSON object");
    const auto& keys = shift_spec_keys();
    for (const auto& [key, _] : j.items()) {
        if (key == "version") continue;
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError("shift spec: unknown key '" + key + "'");
        }
    }
    try {
        auto get = [&j](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        get("num_classes", s.num_classes);
        get("dim", s.dim);
        get("source_per_class", s.source_per_class);
        get("target_per_class", s.target_per_class);
        get("severity", s.severity);
        get("noise_scale", s.noise_scale);
        get("mean_scale", s.mean_scale);
        get("data_seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("shift spec: ") + e.what());
    }
    return s;
}

GeneratedPair generate(const ShiftSpec& spec) {
    spec.validate();
    const std::size_t d = spec.dim;
    const std::size_t classes = spec.num_classes;

    RngStream mean_rng(spec.seed, Stream::kDataMeans);
    Matrix means(classes, d);
    for (double& m : means.values()) m = spec.mean_scale * mean_rng.normal();

    // Shift geometry is drawn for every severity so that s only scales it.
    RngStream shift_rng(spec.seed, Stream::kDataShift);
    const std::vector<double> u = random_unit(d, shift_rng);
    std::vector<double> v = random_unit(d, shift_rng);
    const double proj = std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
    for (std::size_t i = 0; i < d; ++i) v[i] -= proj * u[i];
    const double vnorm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (double& x : v) x /= vnorm;
    Matrix offsets(classes, d);
    for (std::size_t c = 0; c < classes; ++c) {
        const auto o = random_unit(d, shift_rng);
        std::copy(o.begin(), o.end(), offsets.row(c).begin());
    }

    const double s = spec.severity;
    const double angle = s * kDegreesPerSeverity * std::numbers::pi / 180.0;
    const double scale = 1.0 + kScalePerSeverity * s;
    // x_target = z * (scale * R)^T + s * o_c, applied row-wise.
    const Matrix transform_t = scaled(plane_rotation(u, v, angle), scale).transpose();

    GeneratedPair pair;
    pair.spec = spec;
    pair.source = empty_dataset(Domain::kSource, d, classes * spec.source_per_class);
    pair.target = empty_dataset(Domain::kTarget, d, classes * spec.target_per_class);

    RngStream source_noise(spec.seed, Stream::kDataSourceNoise);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < spec.source_per_class; ++i, ++row) {
            auto x = pair.source.features.row(row);
            for (std::size_t k = 0; k < d; ++k) x[k] = means(c, k) + spec.noise_scale * source_noise.normal();
            pair.source.labels.push_back(static_cast<int>(c));
            pair.source.ids.push_back(row);
        }
    }

    RngStream target_noise(spec.seed, Stream::kDataTargetNoise);
    Matrix z(classes * spec.target_per_class, d);
    row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < spec.target_per_class; ++i, ++row) {
            auto x = z.row(row);
            for (std::size_t k = 0; k < d; ++k) x[k] = means(c, k) + spec.noise_scale * target_noise.normal();
            pair.target.labels.push_back(static_cast<int>(c));
            pair.target.ids.push_back(row);
        }
    }
    pair.target.features = matmul(z, transform_t);
    for (std::size_t r = 0; r < pair.target.size(); ++r) {
        const auto c = static_cast<std::size_t>(pair.target.labels[r]);
        auto x = pair.target.features.row(r);
        for (std::size_t k = 0; k < d; ++k) x[k] += s * offsets(c, k);
    }
    return pair;
}

void export_csv(const LabeledDataset& data, const std::filesystem::path& path) {
    if (data.features.rows() != data.size() || data.ids.size() != data.size()) {
        throw ConfigError("export_csv: dataset fields have inconsistent lengths");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "id,domain,label";
    for (std::size_t k = 0; k < data.dim(); ++k) out << ",f_" << k;
    out << '\n';

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data.ids[a] < data.ids[b]; });
    const std::string domain(to_string(data.domain));
    char buf[32];
    for (std::size_t r : order) {
        out << data.ids[r] << ',' << domain << ',' << data.labels[r];
        for (double v : data.features.row(r)) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw IoError(where + ": cannot parse '" + std::string(text) + "'");
    }
    return value;
}

double parse_double(std::string_view text, const std::string& where) {
    // strtod handles every form %.17g produces (inf/nan excluded below).
    std::string owned(text);
    char* end = nullptr;
    const double v = std::strtod(owned.c_str(), &end);
    if (owned.empty() || end != owned.c_str() + owned.size() || !std::isfinite(v)) {
        throw IoError(where + ": invalid feature value '" + owned + "'");
    }
    return v;
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, std::optional<Domain> fallback_domain) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_commas(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "domain" || header[2] != "label") {
        throw IoError(path.string() + ": header must start with id,domain,label");
    }
    const std::size_t dim = header.size() - 3;
    for (std::size_t k = 0; k < dim; ++k) {
        if (header[3 + k] != "f_" + std::to_string(k)) {
            throw IoError(path.string() + ": unexpected column '" + std::string(header[3 + k]) + "'");
        }
    }

    LabeledDataset data;
    std::optional<Domain> domain;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        const auto fields = split_commas(line);
        if (fields.size() != header.size()) throw IoError(where + ": wrong number of columns");
        data.ids.push_back(parse_number<std::uint64_t>(fields[0], where));
        Domain row_domain;
        try {
            row_domain = parse_domain(fields[1]);
        } catch (const ConfigError& e) {
            throw IoError(where + ": " + e.what());
        }
        if (domain && *domain != row_domain) throw IoError(where + ": mixed domains in one file");
        domain = row_domain;
        data.labels.push_back(parse_number<int>(fields[2], where));
        for (std::size_t k = 0; k < dim; ++k) values.push_back(parse_double(fields[3 + k], where));
    }
    data.domain = domain ? *domain : fallback_domain.value_or(Domain::kSource);
    data.features = Matrix(data.ids.size(), dim, std::move(values));
    if (std::any_of(data.labels.begin(), data.labels.end(), [](int y) { return y < 0; })) {
        throw IoError(path.string() + ": negative label");
    }
    return data;
}

}  // namespace fmda
