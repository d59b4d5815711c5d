#pragma once

// File formats: JSON documents (permutation, Latin square, certificate,
// table manifest), JSON-lines streams, the CSV table manifest, and plain
// whitespace-separated integer grids for squares.

#include <latinbal/anneal.hpp>
#include <latinbal/certify.hpp>
#include <latinbal/core.hpp>

#include <nlohmann/json.hpp>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace latinbal::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr std::string_view kPermutationType = "permutation";
inline constexpr std::string_view kSquareType = "latin_square";
inline constexpr std::string_view kCertificateType = "near_pp_certificate";
inline constexpr std::string_view kManifestType = "table_manifest";

[[noreturn]] inline void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

namespace detail {

inline void expect_header(const Json& doc, std::string_view type) {
  if (!doc.is_object()) parse_error("expected a JSON object");
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer())
    parse_error("missing integer field format_version");
  if (doc["format_version"].get<int>() != kFormatVersion)
    parse_error("unsupported format_version " + doc["format_version"].dump());
  if (doc.contains("type") && doc["type"] != type)
    parse_error("expected document type " + std::string(type) + ", got " + doc["type"].dump());
}

template <typename T>
T field(const Json& doc, const char* name) {
  if (!doc.contains(name)) parse_error(std::string("missing field ") + name);
  try {
    return doc[name].get<T>();
  } catch (const nlohmann::json::exception& e) {
    parse_error(std::string("field ") + name + ": " + e.what());
  }
}

inline int order_field(const Json& doc) {
  if (!doc.contains("n") || !doc["n"].is_number_integer()) parse_error("missing integer field n");
  return doc["n"].get<int>();
}

inline Json metadata_of(const Json& doc) {
  if (!doc.contains("metadata")) return Json::object();
  if (!doc["metadata"].is_object()) parse_error("metadata must be an object");
  return doc["metadata"];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Permutation documents

struct PermutationDocument {
  Permutation sigma = Permutation::identity(1);
  Json metadata = Json::object();

  friend bool operator==(const PermutationDocument&, const PermutationDocument&) = default;
};

inline Json to_json(const PermutationDocument& doc) {
  Json out;
  out["format_version"] = kFormatVersion;
  out["type"] = kPermutationType;
  out["n"] = doc.sigma.order();
  out["sigma"] = std::vector<int>(doc.sigma.image().begin(), doc.sigma.image().end());
  if (!doc.metadata.empty()) out["metadata"] = doc.metadata;
  return out;
}

inline PermutationDocument permutation_from_json(const Json& doc) {
  detail::expect_header(doc, kPermutationType);
  const int n = detail::order_field(doc);
  auto image = detail::field<std::vector<int>>(doc, "sigma");
  if (static_cast<int>(image.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "sigma has " + std::to_string(image.size()) + " entries, n = " + std::to_string(n));
  return PermutationDocument{Permutation::from_image(std::move(image)), detail::metadata_of(doc)};
}

// ---------------------------------------------------------------------------
// Square documents

struct SquareDocument {
  LatinSquare square = validate_latin(1, {0});
  Json metadata = Json::object();

  friend bool operator==(const SquareDocument&, const SquareDocument&) = default;
};

inline Json to_json(const SquareDocument& doc) {
  Json out;
  out["format_version"] = kFormatVersion;
  out["type"] = kSquareType;
  out["n"] = doc.square.order();
  out["cells"] = doc.square.rows();
  if (!doc.metadata.empty()) out["metadata"] = doc.metadata;
  return out;
}

inline std::vector<std::vector<int>> cells_from_json(const Json& cells) {
  if (!cells.is_array()) parse_error("cells must be an array of rows");
  std::vector<std::vector<int>> rows;
  for (const auto& row : cells) {
    if (!row.is_array()) parse_error("each row must be an array");
    std::vector<int> values;
    for (const auto& v : row) {
      if (!v.is_number_integer()) parse_error("cell " + v.dump() + " is not an integer");
      values.push_back(v.get<int>());
    }
    rows.push_back(std::move(values));
  }
  return rows;
}

inline SquareDocument square_from_json(const Json& doc) {
  detail::expect_header(doc, kSquareType);
  const int n = detail::order_field(doc);
  if (!doc.contains("cells")) parse_error("missing field cells");
  const auto rows = cells_from_json(doc["cells"]);
  if (static_cast<int>(rows.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "cells has " + std::to_string(rows.size()) + " rows, n = " + std::to_string(n));
  return SquareDocument{validate_latin(rows), detail::metadata_of(doc)};
}

// ---------------------------------------------------------------------------
// Certificates

/// elapsed_seconds is wall-clock time and is written only on request, so that
/// a default certificate depends on nothing but the configuration and seed.
inline Json to_json(const NearPPCertificate& cert, bool include_elapsed = false) {
  Json out;
  out["format_version"] = kFormatVersion;
  out["type"] = kCertificateType;
  out["n"] = cert.n;
  out["sigma"] = std::vector<int>(cert.sigma.image().begin(), cert.sigma.image().end());
  out["profile"] = cert.profile;
  out["imbalance3"] = cert.imbalance3;
  out["I_star"] = format_thirds(cert.imbalance3);
  Json meta;
  meta["seed"] = cert.seed;
  meta["rng"] = cert.rng;
  meta["steps"] = cert.steps;
  meta["restarts"] = cert.restarts;
  meta["tool_version"] = kToolVersion;
  if (include_elapsed) meta["elapsed_seconds"] = cert.elapsed_seconds;
  out["metadata"] = meta;
  return out;
}

/// Lenient parse: sigma need not be a bijection, so tampered certificates
/// still reach the verifier.
inline certify::CertificateClaims certificate_claims_from_json(const Json& doc) {
  detail::expect_header(doc, kCertificateType);
  certify::CertificateClaims claims;
  claims.n = detail::order_field(doc);
  claims.sigma = detail::field<std::vector<int>>(doc, "sigma");
  claims.profile = detail::field<std::vector<Int>>(doc, "profile");
  claims.imbalance3 = detail::field<Int>(doc, "imbalance3");
  return claims;
}

inline NearPPCertificate certificate_from_json(const Json& doc) {
  const auto claims = certificate_claims_from_json(doc);
  if (static_cast<int>(claims.sigma.size()) != claims.n)
    throw Error(ErrorCode::DimensionMismatch, "sigma length differs from n");
  NearPPCertificate cert;
  cert.n = claims.n;
  cert.sigma = Permutation::from_image(claims.sigma);
  cert.profile = claims.profile;
  cert.imbalance3 = claims.imbalance3;
  const Json meta = detail::metadata_of(doc);
  cert.seed = meta.value("seed", std::uint64_t{0});
  cert.rng = meta.value("rng", std::string(kRngAlgorithm));
  cert.steps = meta.value("steps", std::uint64_t{0});
  cert.restarts = meta.value("restarts", 0);
  cert.elapsed_seconds = meta.value("elapsed_seconds", 0.0);
  return cert;
}

// ---------------------------------------------------------------------------
// Plain grids and auto-detection

/// Whitespace-separated integers, one row per non-empty line. Lines starting
/// with '#' are comments.
inline std::vector<std::vector<int>> parse_grid(std::string_view text) {
  std::vector<std::vector<int>> rows;
  std::istringstream lines{std::string(text)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(lines, line)) {
    ++line_number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream tokens(line);
    std::string token;
    std::vector<int> row;
    while (tokens >> token) {
      std::size_t used = 0;
      int value = 0;
      try {
        value = std::stoi(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size())
        parse_error("line " + std::to_string(line_number) + ": '" + token + "' is not an integer");
      row.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) parse_error("no grid rows found");
  return rows;
}

inline std::string format_grid(const LatinSquare& square) {
  std::string out;
  const int n = square.order();
  const int width = static_cast<int>(std::to_string(n - 1).size());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      std::string cell = std::to_string(square.at(r, c));
      out += std::string(static_cast<std::size_t>(width) - cell.size() + (c ? 1 : 0), ' ') + cell;
    }
    out += '\n';
  }
  return out;
}

enum class DocumentKind { Permutation, Square, Certificate, Grid };

struct LoadedDocument {
  DocumentKind kind;
  Json json;                               ///< empty for plain grids
  std::vector<std::vector<int>> grid_rows;  ///< plain grids only
};

/// Text whose first non-space character is '{' or '[' is JSON; anything
/// else is a plain grid. A bare JSON array is read as the cells of a square.
inline LoadedDocument load_document(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) parse_error("empty input");
  if (text[first] != '{' && text[first] != '[')
    return LoadedDocument{DocumentKind::Grid, Json(), parse_grid(text)};

  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_error(std::string("invalid JSON: ") + e.what());
  }
  if (doc.is_array()) return LoadedDocument{DocumentKind::Grid, Json(), cells_from_json(doc)};
  if (!doc.is_object()) parse_error("expected a JSON object");
  const std::string type = doc.value("type", std::string());
  if (type == kCertificateType) return LoadedDocument{DocumentKind::Certificate, doc, {}};
  if (type == kPermutationType || (type.empty() && doc.contains("sigma")))
    return LoadedDocument{DocumentKind::Permutation, doc, {}};
  if (type == kSquareType || (type.empty() && doc.contains("cells")))
    return LoadedDocument{DocumentKind::Square, doc, {}};
  parse_error("unrecognised document type '" + type + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Loads a square from a SquareDocument, a bare JSON cell array or a plain grid.
inline SquareDocument load_square(std::string_view text) {
  auto doc = load_document(text);
  switch (doc.kind) {
    case DocumentKind::Grid: return SquareDocument{validate_latin(doc.grid_rows), Json::object()};
    case DocumentKind::Square: return square_from_json(doc.json);
    default: parse_error("expected a Latin square document or grid");
  }
}

// ---------------------------------------------------------------------------
// Table manifest

inline std::string format_seconds(double seconds) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3f", seconds);
  return buffer;
}

/// CSV with header "n,I_star,seconds". Failed rows carry I_star "failed".
inline std::string manifest_csv(const certify::TableManifest& manifest) {
  std::string out = "n,I_star,seconds\n";
  for (const auto& row : manifest.rows)
    out += std::to_string(row.n) + "," + (row.ok ? row.i_star : std::string("failed")) + "," +
           format_seconds(row.seconds) + "\n";
  return out;
}

struct ManifestCsvRow {
  int n;
  std::string i_star;
  double seconds;
  friend bool operator==(const ManifestCsvRow&, const ManifestCsvRow&) = default;
};

inline std::vector<ManifestCsvRow> parse_manifest_csv(std::string_view text) {
  std::istringstream lines{std::string(text)};
  std::string line;
  if (!std::getline(lines, line) || line != "n,I_star,seconds") parse_error("missing CSV header n,I_star,seconds");
  std::vector<ManifestCsvRow> rows;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) parse_error("malformed CSV row: " + line);
    try {
      rows.push_back(ManifestCsvRow{std::stoi(line.substr(0, c1)), line.substr(c1 + 1, c2 - c1 - 1),
                                    std::stod(line.substr(c2 + 1))});
    } catch (const std::exception&) {
      parse_error("malformed CSV row: " + line);
    }
  }
  return rows;
}

inline Json to_json(const certify::TableManifest& manifest) {
  Json out;
  out["format_version"] = kFormatVersion;
  out["type"] = kManifestType;
  Json rows = Json::array();
  for (const auto& row : manifest.rows) {
    Json r;
    r["n"] = row.n;
    r["ok"] = row.ok;
    r["I_star"] = row.i_star;
    r["imbalance3"] = row.imbalance3;
    r["seconds"] = row.seconds;
    if (!row.failure.empty()) r["failure"] = row.failure;
    if (row.certificate) r["certificate"] = to_json(*row.certificate);
    rows.push_back(std::move(r));
  }
  out["rows"] = std::move(rows);
  return out;
}

}  // namespace latinbal::io
