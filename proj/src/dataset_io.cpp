#include "pscat/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <openssl/evp.h>

#include "pscat/errors.hpp"

namespace pscat::io {

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

void check_keys(const json& object, const std::set<std::string>& allowed, Mode mode, json* extras,
                const std::string& where) {
    if (!object.is_object()) schema_error(where, "expected an object");
    for (const auto& [key, value] : object.items()) {
        if (allowed.count(key)) continue;
        if (mode == Mode::strict) schema_error(where, "unknown key '" + key + "'");
        if (extras) (*extras)[key] = value;
    }
}

const json& field(const json& object, const std::string& key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end()) schema_error(where, "missing field '" + key + "'");
    return *it;
}

double number(const json& value, const std::string& where) {
    if (!value.is_number()) schema_error(where, "expected a number");
    return value.get<double>();
}

std::vector<double> numbers(const json& value, const std::string& where) {
    if (!value.is_array()) schema_error(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < value.size(); ++i) out.push_back(number(value[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json point_json(const Vec3& p) { return json::array({p.x(), p.y(), p.z()}); }
json point_json(const Point2& p) { return json::array({p.x(), p.y()}); }

Vec3 vec3_from(const json& value, const std::string& where) {
    const auto v = numbers(value, where);
    if (v.size() != 3) schema_error(where, "expected 3 coordinates");
    return {v[0], v[1], v[2]};
}

Point2 point2_from(const json& value, const std::string& where) {
    const auto v = numbers(value, where);
    if (v.size() != 2) schema_error(where, "expected 2 coordinates");
    return {v[0], v[1]};
}

json points_json(const std::vector<Vec3>& points) {
    json out = json::array();
    for (const auto& p : points) out.push_back(point_json(p));
    return out;
}

std::vector<Vec3> points_from(const json& value, const std::string& where) {
    if (!value.is_array()) schema_error(where, "expected an array of points");
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < value.size(); ++i) out.push_back(vec3_from(value[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json matrix_json(const CMatrix& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row_re = json::array(), row_im = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row_re.push_back(m(i, j).real());
            row_im.push_back(m(i, j).imag());
        }
        re.push_back(row_re);
        im.push_back(row_im);
    }
    return json{{"re", re}, {"im", im}};
}

CMatrix matrix_from(const json& value, Mode mode, const std::string& where) {
    check_keys(value, {"re", "im"}, mode, nullptr, where);
    const json& re = field(value, "re", where);
    const json& im = field(value, "im", where);
    if (!re.is_array() || !im.is_array() || re.size() != im.size()) {
        schema_error(where, "re and im must be arrays of equal length");
    }
    const auto n = Eigen::Index(re.size());
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row_where = where + "[" + std::to_string(i) + "]";
        const auto r = numbers(re[i], row_where + ".re");
        const auto c = numbers(im[i], row_where + ".im");
        if (Eigen::Index(r.size()) != n || Eigen::Index(c.size()) != n) schema_error(where, "matrix must be square");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(r[j], c[j]);
    }
    return m;
}

std::string hex(const unsigned char* data, unsigned size) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < size; ++i) {
        out += digits[data[i] >> 4];
        out += digits[data[i] & 15];
    }
    return out;
}

}  // namespace

std::string kind_name(Kind kind) {
    switch (kind) {
        case Kind::config: return "config";
        case Kind::samples: return "samples";
        case Kind::result: return "result";
    }
    return "unknown";
}

std::string canonical_dump(const json& value) { return value.dump(); }

std::string payload_checksum(const json& payload) {
    const std::string text = canonical_dump(payload);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned size = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    return hex(digest, size);
}

void require_finite(const json& value, const std::string& where) {
    if (value.is_number_float() && !std::isfinite(value.get<double>())) {
        throw ValidationError(where + ": non-finite value");
    }
    if (value.is_object()) {
        for (const auto& [key, item] : value.items()) require_finite(item, where + "." + key);
    } else if (value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) require_finite(value[i], where + "[" + std::to_string(i) + "]");
    }
}

std::string render_document(Kind kind, const json& payload, const Extras& extras) {
    json body = payload;
    for (const auto& [key, value] : extras.payload.items()) {
        if (!body.contains(key)) body[key] = value;
    }
    require_finite(body);
    json envelope = extras.envelope.is_object() ? extras.envelope : json::object();
    envelope["format_version"] = kFormatVersion;
    envelope["kind"] = kind_name(kind);
    envelope["payload"] = body;
    envelope["checksum"] = payload_checksum(body);
    return envelope.dump(2) + "\n";
}

json parse_document(const std::string& text, Kind expected, Mode mode, Extras* extras) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
    json* envelope_extras = extras ? &extras->envelope : nullptr;
    check_keys(doc, {"format_version", "kind", "payload", "checksum"}, mode, envelope_extras, "envelope");
    const json& version = field(doc, "format_version", "envelope");
    if (!version.is_number_integer() || version.get<long long>() != kFormatVersion) {
        schema_error("envelope.format_version", "unsupported version " + version.dump());
    }
    const json& kind = field(doc, "kind", "envelope");
    if (!kind.is_string() || kind.get<std::string>() != kind_name(expected)) {
        schema_error("envelope.kind", "expected '" + kind_name(expected) + "', found " + kind.dump());
    }
    const json& payload = field(doc, "payload", "envelope");
    if (!payload.is_object()) schema_error("envelope.payload", "expected an object");
    const json& checksum = field(doc, "checksum", "envelope");
    if (!checksum.is_string() || checksum.get<std::string>() != payload_checksum(payload)) {
        schema_error("envelope.checksum", "does not match the payload");
    }
    return payload;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path temp = path;
    temp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + temp.string() + " for writing");
        out << text;
        out.flush();
        if (!out) throw IoError("write failed for " + temp.string());
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec) {
        std::filesystem::remove(temp, ec);
        throw IoError("cannot replace " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path.string());
    return buffer.str();
}

// ---------------------------------------------------------------------------

json config_to_json(const Configuration& config) {
    return json{{"xi", points_json(config.xi())},
                {"tan_half_theta", matrix_json(config.tan_half_theta())},
                {"half_space", config.half_space()}};
}

Configuration config_from_json(const json& payload, Mode mode, Extras* extras) {
    json* payload_extras = extras ? &extras->payload : nullptr;
    check_keys(payload, {"xi", "tan_half_theta", "alpha", "half_space"}, mode, payload_extras, "config");
    auto xi = points_from(field(payload, "xi", "config"), "config.xi");
    bool half_space = false;
    if (payload.contains("half_space")) {
        if (!payload["half_space"].is_boolean()) schema_error("config.half_space", "expected a boolean");
        half_space = payload["half_space"].get<bool>();
    }
    const bool has_t = payload.contains("tan_half_theta"), has_alpha = payload.contains("alpha");
    if (has_t == has_alpha) schema_error("config", "exactly one of 'tan_half_theta' and 'alpha' is required");
    if (has_alpha) {
        const auto alpha = numbers(payload["alpha"], "config.alpha");
        if (alpha.size() != xi.size()) schema_error("config.alpha", "length differs from xi");
        return alpha_to_config(alpha, std::move(xi), half_space);
    }
    CMatrix t = matrix_from(payload["tan_half_theta"], mode, "config.tan_half_theta");
    if (t.rows() != Eigen::Index(xi.size())) schema_error("config.tan_half_theta", "size differs from xi");
    return Configuration(std::move(xi), std::move(t), half_space);
}

json samples_to_json(const PlaneSamples& samples) {
    json pairs = json::array();
    for (const auto& p : samples.pairs) {
        pairs.push_back(json{{"x", point_json(p.x)}, {"y", point_json(p.y)}, {"g_re", p.g.real()}, {"g_im", p.g.imag()}});
    }
    return json{{"k0", samples.k0}, {"noise_sigma", samples.noise_sigma}, {"seed", samples.seed}, {"pairs", pairs}};
}

PlaneSamples samples_from_json(const json& payload, Mode mode, Extras* extras) {
    json* payload_extras = extras ? &extras->payload : nullptr;
    check_keys(payload, {"k0", "noise_sigma", "seed", "pairs"}, mode, payload_extras, "samples");
    PlaneSamples s;
    s.k0 = number(field(payload, "k0", "samples"), "samples.k0");
    s.noise_sigma = number(field(payload, "noise_sigma", "samples"), "samples.noise_sigma");
    const json& seed = field(payload, "seed", "samples");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
        schema_error("samples.seed", "expected a non-negative integer");
    }
    s.seed = seed.get<std::uint64_t>();
    const json& pairs = field(payload, "pairs", "samples");
    if (!pairs.is_array()) schema_error("samples.pairs", "expected an array");
    s.pairs.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto where = "samples.pairs[" + std::to_string(i) + "]";
        check_keys(pairs[i], {"x", "y", "g_re", "g_im"}, mode, nullptr, where);
        s.pairs.push_back(PlanePair{point2_from(field(pairs[i], "x", where), where + ".x"),
                                    point2_from(field(pairs[i], "y", where), where + ".y"),
                                    cplx(number(field(pairs[i], "g_re", where), where + ".g_re"),
                                         number(field(pairs[i], "g_im", where), where + ".g_im"))});
    }
    s.validate();
    return s;
}

json result_to_json(const ReconstructionResult& r) {
    json diagnostics = json::array();
    for (const auto& d : r.diagnostics) diagnostics.push_back(d);
    return json{{"xi", points_json(r.xi_hat)},
                {"p", matrix_json(r.p_hat)},
                {"tan_half_theta", matrix_json(r.tan_half_hat)},
                {"theta", r.theta_hat ? matrix_json(r.theta_hat->matrix()) : json(nullptr)},
                {"residual_rms", r.residual_rms},
                {"hermiticity_defect", r.hermiticity_defect},
                {"model_order", r.model_order},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"diagnostics", diagnostics}};
}

ReconstructionResult result_from_json(const json& payload, Mode mode, Extras* extras) {
    json* payload_extras = extras ? &extras->payload : nullptr;
    check_keys(payload,
               {"xi", "p", "tan_half_theta", "theta", "residual_rms", "hermiticity_defect", "model_order",
                "iterations", "converged", "diagnostics"},
               mode, payload_extras, "result");
    ReconstructionResult r;
    r.xi_hat = points_from(field(payload, "xi", "result"), "result.xi");
    r.p_hat = matrix_from(field(payload, "p", "result"), mode, "result.p");
    r.tan_half_hat = matrix_from(field(payload, "tan_half_theta", "result"), mode, "result.tan_half_theta");
    const json& theta = field(payload, "theta", "result");
    if (!theta.is_null()) r.theta_hat = ThetaMatrix(matrix_from(theta, mode, "result.theta"));
    r.residual_rms = number(field(payload, "residual_rms", "result"), "result.residual_rms");
    r.hermiticity_defect = number(field(payload, "hermiticity_defect", "result"), "result.hermiticity_defect");
    const json& order = field(payload, "model_order", "result");
    if (!order.is_number_integer()) schema_error("result.model_order", "expected an integer");
    r.model_order = order.get<int>();
    if (payload.contains("iterations")) {
        if (!payload["iterations"].is_number_integer()) schema_error("result.iterations", "expected an integer");
        r.iterations = payload["iterations"].get<int>();
    }
    if (payload.contains("converged")) {
        if (!payload["converged"].is_boolean()) schema_error("result.converged", "expected a boolean");
        r.converged = payload["converged"].get<bool>();
    }
    if (payload.contains("diagnostics")) {
        const json& d = payload["diagnostics"];
        if (!d.is_array()) schema_error("result.diagnostics", "expected an array of strings");
        for (const auto& item : d) {
            if (!item.is_string()) schema_error("result.diagnostics", "expected an array of strings");
            r.diagnostics.push_back(item.get<std::string>());
        }
    }
    const auto n = Eigen::Index(r.xi_hat.size());
    if (r.model_order != n || r.p_hat.rows() != n || r.tan_half_hat.rows() != n) {
        schema_error("result", "model_order, xi, p and tan_half_theta sizes disagree");
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

template <class Parse>
auto read_kind(const std::filesystem::path& path, Kind kind, Mode mode, Extras* extras, Parse parse) {
    const std::string text = read_text(path);
    try {
        const json payload = parse_document(text, kind, mode, extras);
        return parse(payload);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

}  // namespace

Configuration read_config(const std::filesystem::path& path, Mode mode, Extras* extras) {
    return read_kind(path, Kind::config, mode, extras,
                     [&](const json& p) { return config_from_json(p, mode, extras); });
}

void write_config(const std::filesystem::path& path, const Configuration& config, const Extras& extras) {
    write_text_atomic(path, render_document(Kind::config, config_to_json(config), extras));
}

PlaneSamples read_samples(const std::filesystem::path& path, Mode mode, Extras* extras) {
    return read_kind(path, Kind::samples, mode, extras,
                     [&](const json& p) { return samples_from_json(p, mode, extras); });
}

void write_samples(const std::filesystem::path& path, const PlaneSamples& samples, const Extras& extras) {
    write_text_atomic(path, render_document(Kind::samples, samples_to_json(samples), extras));
}

ReconstructionResult read_result(const std::filesystem::path& path, Mode mode, Extras* extras) {
    return read_kind(path, Kind::result, mode, extras,
                     [&](const json& p) { return result_from_json(p, mode, extras); });
}

void write_result(const std::filesystem::path& path, const ReconstructionResult& result, const Extras& extras) {
    write_text_atomic(path, render_document(Kind::result, result_to_json(result), extras));
}

}  // namespace pscat::io
