#pragma once

#include <filesystem>
#include <string>

#include "bmdp/model.hpp"
#include "json.hpp"

namespace bmdp {

using Json = nlohmann::json;

/// {n, S, A, H, f, p, q, mu, r} with row-major nested arrays: p is S x A x S,
/// q is S x n, r is H x n x A. Context, state and action ids are zero-based.
Json model_to_json(const Bmdp& model);

/// Parses the document written by model_to_json. Shape errors throw
/// std::invalid_argument; probability invariants are not checked here (use
/// validate).
Bmdp model_from_json(const Json& doc);

void write_model(const Bmdp& model, const std::filesystem::path& path);
Bmdp read_model(const std::filesystem::path& path);

/// FNV-1a 64 of the compact JSON serialization, hex encoded.
std::string model_hash(const Bmdp& model);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& doc, const std::filesystem::path& path);

}  // namespace bmdp
