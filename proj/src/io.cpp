#include "kgtc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "kgtc/error.hpp"
#include "kgtc/log.hpp"

namespace kgtc::io {
namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::out | mode);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

// Calls fn(line_number, line) for every non-comment, non-blank line.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fn(number, line);
  }
}

std::uint32_t parse_id(std::string_view text, const std::filesystem::path& path, std::size_t line) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError(fmt::format("{}:{}: bad id '{}'", path.string(), line, text));
  }
  return value;
}

std::vector<std::string> split_classes(const std::string& field) {
  std::vector<std::string> out;
  for (auto& c : split(field, ',')) {
    if (!c.empty()) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::vector<TripleRecord> read_triples_file(const std::filesystem::path& path) {
  std::vector<TripleRecord> records;
  for_each_line(path, [&](std::size_t number, const std::string& line) {
    records.push_back({number, split(line, '\t')});
  });
  return records;
}

TypeAssignment read_types_file(const std::filesystem::path& path, const Vocabulary& vocab) {
  TypeAssignment types;
  std::size_t unknown = 0;
  for_each_line(path, [&](std::size_t number, const std::string& line) {
    auto fields = split(line, '\t');
    if (fields.size() < 2 || fields[0].empty()) {
      throw InputError(fmt::format("{}:{}: expected entity and at least one class", path.string(), number));
    }
    if (!vocab.has_entity(fields[0])) {
      ++unknown;
      return;
    }
    auto& classes = types[vocab.entity_id(fields[0])];
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (!fields[i].empty()) classes.insert(fields[i]);
    }
  });
  if (unknown > 0) log::warn("types: ignored {} entities not present in the triples", unknown);
  return types;
}

ConstraintDeclarations read_constraints_file(const std::filesystem::path& path, const Vocabulary& vocab) {
  ConstraintDeclarations decls;
  for_each_line(path, [&](std::size_t number, const std::string& line) {
    auto fields = split(line, '\t');
    if (fields.size() != 3 || fields[0].empty()) {
      throw InputError(fmt::format("{}:{}: expected relation, domain classes, range classes",
                                   path.string(), number));
    }
    if (!vocab.has_relation(fields[0])) {
      log::warn("constraints: relation '{}' does not occur in the triples", fields[0]);
      return;
    }
    decls[vocab.relation_id(fields[0])] = {split_classes(fields[1]), split_classes(fields[2])};
  });
  return decls;
}

void write_triples_file(const std::filesystem::path& path, std::span<const Triple> triples,
                        const Vocabulary& vocab) {
  std::ofstream out = open_output(path);
  for (const Triple& t : triples) {
    out << vocab.entity_label(t.s) << '\t' << vocab.relation_label(t.p) << '\t'
        << vocab.entity_label(t.o) << '\n';
  }
}

std::vector<Triple> read_id_triples(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::vector<Triple> out;
  for_each_line(path, [&](std::size_t number, const std::string& line) {
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw InputError(fmt::format("{}:{}: expected 3 tab-separated fields", path.string(), number));
    }
    out.push_back({vocab.entity_id(fields[0]), vocab.relation_id(fields[1]), vocab.entity_id(fields[2])});
  });
  return out;
}

void write_vocabulary(const std::filesystem::path& dir, const Vocabulary& vocab) {
  std::ofstream ents = open_output(dir / "entities.tsv");
  for (const auto& label : vocab.entity_labels()) ents << label << '\n';
  std::ofstream rels = open_output(dir / "relations.tsv");
  for (const auto& label : vocab.relation_labels()) rels << label << '\n';
}

Vocabulary read_vocabulary(const std::filesystem::path& dir) {
  Vocabulary vocab;
  // Labels are written one per line in id order; blank lines cannot occur.
  std::ifstream ents = open_input(dir / "entities.tsv");
  for (std::string line; std::getline(ents, line);) vocab.add_entity(line);
  std::ifstream rels = open_input(dir / "relations.tsv");
  for (std::string line; std::getline(rels, line);) vocab.add_relation(line);
  return vocab;
}

void write_semantics(const std::filesystem::path& path, const RelationSemantics& semantics) {
  std::ofstream out = open_output(path);
  auto side = [&](const std::vector<EntityId>& ids) {
    if (ids.size() == semantics.num_entities() && semantics.num_entities() > 0) return std::string("*");
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) s += ' ';
      s += std::to_string(ids[i]);
    }
    return s;
  };
  for (RelationId p = 0; p < semantics.num_relations(); ++p) {
    out << p << '\t' << to_string(semantics.provenance(p)) << '\t' << side(semantics.domain(p)) << '\t'
        << side(semantics.range(p)) << '\n';
  }
}

RelationSemantics read_semantics(const std::filesystem::path& path, std::size_t num_entities) {
  std::vector<RelationSemantics::Relation> relations;
  for_each_line(path, [&](std::size_t number, const std::string& line) {
    auto fields = split(line, '\t');
    if (fields.size() != 4) throw InputError(fmt::format("{}:{}: expected 4 fields", path.string(), number));
    if (parse_id(fields[0], path, number) != relations.size()) {
      throw InputError(fmt::format("{}:{}: relations out of order", path.string(), number));
    }
    auto side = [&](const std::string& text) {
      std::vector<EntityId> ids;
      if (text == "*") {
        ids.resize(num_entities);
        for (std::size_t e = 0; e < num_entities; ++e) ids[e] = static_cast<EntityId>(e);
        return ids;
      }
      for (const auto& tok : split(text, ' ')) {
        if (!tok.empty()) ids.push_back(parse_id(tok, path, number));
      }
      return ids;
    };
    relations.push_back({side(fields[2]), side(fields[3]), provenance_from_string(fields[1])});
  });
  return RelationSemantics(num_entities, std::move(relations));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
}

void append_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_output(path, std::ios::app);
  out << text;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string file_checksum(const std::filesystem::path& path) { return fnv1a_hex(read_text(path)); }

}  // namespace kgtc::io
