#pragma once

// Versioned JSON files for configurations, plane samples and reconstruction results.
//
// Every file is an envelope
//   {"format_version": 1, "kind": "config" | "samples" | "result", "payload": {...}, "checksum": "<sha256>"}
// with the checksum taken over the compact canonical dump of the payload. Output is
// canonical (sorted keys, shortest round-trip doubles) so equal inputs give equal bytes.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pscat/inverse.hpp"
#include "pscat/krein.hpp"

namespace pscat::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kExtension = ".pscat.json";

enum class Kind { config, samples, result };
enum class Mode { strict, lenient };

std::string kind_name(Kind kind);

/// Unknown keys met in lenient mode, kept so a rewrite emits them again.
struct Extras {
    json envelope = json::object();
    json payload = json::object();
};

/// Compact dump with sorted keys; the checksum input.
std::string canonical_dump(const json& value);

/// Hex SHA-256 of canonical_dump(payload).
std::string payload_checksum(const json& payload);

/// Throws ValidationError naming the path of the first NaN or infinity.
void require_finite(const json& value, const std::string& where = "payload");

/// Full file text for a payload: envelope, checksum, two-space indentation, trailing newline.
std::string render_document(Kind kind, const json& payload, const Extras& extras = {});

/// Parses and checks an envelope (version, kind, checksum, unknown keys) and returns its payload.
json parse_document(const std::string& text, Kind expected, Mode mode = Mode::strict, Extras* extras = nullptr);

/// Atomically replaces `path` with `text` (temporary file in the same directory, then rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

json config_to_json(const Configuration& config);
/// Accepts either "tan_half_theta" or the local form "alpha".
Configuration config_from_json(const json& payload, Mode mode = Mode::strict, Extras* extras = nullptr);

json samples_to_json(const PlaneSamples& samples);
PlaneSamples samples_from_json(const json& payload, Mode mode = Mode::strict, Extras* extras = nullptr);

json result_to_json(const ReconstructionResult& result);
ReconstructionResult result_from_json(const json& payload, Mode mode = Mode::strict, Extras* extras = nullptr);

Configuration read_config(const std::filesystem::path& path, Mode mode = Mode::strict, Extras* extras = nullptr);
void write_config(const std::filesystem::path& path, const Configuration& config, const Extras& extras = {});

PlaneSamples read_samples(const std::filesystem::path& path, Mode mode = Mode::strict, Extras* extras = nullptr);
void write_samples(const std::filesystem::path& path, const PlaneSamples& samples, const Extras& extras = {});

ReconstructionResult read_result(const std::filesystem::path& path, Mode mode = Mode::strict,
                                 Extras* extras = nullptr);
/// Throws ValidationError before touching the file when any value is NaN or infinite.
void write_result(const std::filesystem::path& path, const ReconstructionResult& result, const Extras& extras = {});

}  // namespace pscat::io
