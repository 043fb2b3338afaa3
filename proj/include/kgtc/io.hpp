#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kgtc/graph.hpp"

namespace kgtc::io {

/// Reads a TAB-separated triples file. '#' lines and blank lines are skipped.
/// Arity is checked later by load_graph so that errors carry line numbers.
std::vector<TripleRecord> read_triples_file(const std::filesystem::path& path);

/// `entity<TAB>class[<TAB>class...]`. Entities missing from the vocabulary
/// are ignored with a warning.
TypeAssignment read_types_file(const std::filesystem::path& path, const Vocabulary& vocab);

/// `relation<TAB>domain,classes<TAB>range,classes`. Unknown relations are
/// ignored with a warning.
ConstraintDeclarations read_constraints_file(const std::filesystem::path& path, const Vocabulary& vocab);

void write_triples_file(const std::filesystem::path& path, std::span<const Triple> triples,
                        const Vocabulary& vocab);
std::vector<Triple> read_id_triples(const std::filesystem::path& path, const Vocabulary& vocab);

void write_vocabulary(const std::filesystem::path& dir, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::filesystem::path& dir);

/// One line per relation: `id<TAB>provenance<TAB>domain<TAB>range`, where a
/// side is a space-separated id list or `*` for every entity.
void write_semantics(const std::filesystem::path& path, const RelationSemantics& semantics);
RelationSemantics read_semantics(const std::filesystem::path& path, std::size_t num_entities);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void append_text(const std::filesystem::path& path, const std::string& text);

/// FNV-1a 64-bit digest of a byte string, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_checksum(const std::filesystem::path& path);

}  // namespace kgtc::io
