#include "kgtc/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "kgtc/error.hpp"
#include "kgtc/io.hpp"

namespace kgtc {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'K', 'G', 'T', 'C', 'C', 'K', 'P', 'T'};

using Json = nlohmann::ordered_json;

Json hyperparams_json(const Hyperparams& hp) {
  Json j;
  j["dim"] = hp.dim;
  j["lambda_a"] = hp.lambda_a;
  j["lambda_r"] = hp.lambda_r;
  j["gamma"] = hp.gamma;
  j["distance"] = std::string(to_string(hp.distance));
  j["corruptions"] = hp.corruptions;
  j["hidden"] = hp.hidden;
  j["l1"] = hp.l1;
  j["l2"] = hp.l2;
  j["dropconnect"] = hp.dropconnect;
  j["learning_rate"] = hp.learning_rate;
  j["batch_size"] = hp.batch_size;
  j["adagrad_epsilon"] = hp.adagrad_epsilon;
  j["max_epochs"] = hp.max_epochs;
  j["patience"] = hp.patience;
  j["sgd_patience"] = hp.sgd_patience;
  j["tolerance"] = hp.tolerance;
  j["init_std"] = hp.init_std;
  j["seed"] = hp.seed;
  return j;
}

Hyperparams hyperparams_from_json(const nlohmann::json& j) {
  Hyperparams hp;
  hp.dim = j.at("dim").get<std::size_t>();
  hp.lambda_a = j.at("lambda_a").get<double>();
  hp.lambda_r = j.at("lambda_r").get<double>();
  hp.gamma = j.at("gamma").get<double>();
  hp.distance = distance_from_string(j.at("distance").get<std::string>());
  hp.corruptions = j.at("corruptions").get<std::size_t>();
  hp.hidden = j.at("hidden").get<std::size_t>();
  hp.l1 = j.at("l1").get<double>();
  hp.l2 = j.at("l2").get<double>();
  hp.dropconnect = j.at("dropconnect").get<double>();
  hp.learning_rate = j.at("learning_rate").get<double>();
  hp.batch_size = j.at("batch_size").get<std::size_t>();
  hp.adagrad_epsilon = j.at("adagrad_epsilon").get<double>();
  hp.max_epochs = j.at("max_epochs").get<std::size_t>();
  hp.patience = j.at("patience").get<std::size_t>();
  hp.sgd_patience = j.at("sgd_patience").get<std::size_t>();
  hp.tolerance = j.at("tolerance").get<double>();
  hp.init_std = j.at("init_std").get<double>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  return hp;
}

struct NamedTensor {
  std::string name;
  const Matrix* matrix = nullptr;
};

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_matrix(std::string& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      char buf[8];
      std::memcpy(buf, &v, 8);
      out.append(buf, 8);
    }
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  void take(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw InputError("checkpoint truncated");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    take(&v, 4);
    return v;
  }
  std::string str(std::size_t n) {
    std::string s(n, '\0');
    take(s.data(), n);
    return s;
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) take(&m(r, c), 8);
    }
    return m;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const ModelParams& params, const CheckpointMeta& meta) {
  const ModelKind kind = kind_of(params);
  std::vector<NamedTensor> tensors;
  Matrix beta_column;
  Json header;
  header["model"] = std::string(to_string(kind));
  header["num_entities"] = num_entities(params);
  header["num_relations"] = num_relations(params);
  header["dim"] = dim_of(params);
  header["regime"] = meta.regime;
  header["config_hash"] = meta.config_hash;
  header["seed"] = meta.hp.seed;
  header["hyperparams"] = hyperparams_json(meta.hp);

  if (const auto* p = std::get_if<RescalParams>(&params)) {
    tensors.push_back({"A", &p->A});
    for (std::size_t k = 0; k < p->R.size(); ++k) tensors.push_back({fmt::format("R{}", k), &p->R[k]});
  } else if (const auto* p = std::get_if<TransEParams>(&params)) {
    header["distance"] = std::string(to_string(p->distance));
    tensors.push_back({"A", &p->A});
    tensors.push_back({"relations", &p->relations});
  } else {
    const auto& mw = std::get<MwnnParams>(params);
    header["keep_probability"] = mw.keep_probability;
    beta_column = mw.beta;
    tensors.push_back({"A", &mw.A});
    tensors.push_back({"relations", &mw.relations});
    tensors.push_back({"W", &mw.W});
    tensors.push_back({"beta", &beta_column});
  }
  Json list = Json::array();
  for (const auto& t : tensors) {
    list.push_back({{"name", t.name}, {"rows", t.matrix->rows()}, {"cols", t.matrix->cols()}});
  }
  header["tensors"] = list;

  const std::string header_text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  for (const auto& t : tensors) put_matrix(out, *t.matrix);
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.str(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) throw InputError("not a kgtc checkpoint");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw InputError(fmt::format("unsupported checkpoint version {}", version));
  }
  const auto header = nlohmann::json::parse(in.str(in.u32()));

  Checkpoint ckpt;
  ckpt.meta.hp = hyperparams_from_json(header.at("hyperparams"));
  ckpt.meta.regime = header.at("regime").get<std::string>();
  ckpt.meta.config_hash = header.at("config_hash").get<std::string>();

  std::vector<Matrix> tensors;
  for (const auto& t : header.at("tensors")) {
    tensors.push_back(in.matrix(t.at("rows").get<Eigen::Index>(), t.at("cols").get<Eigen::Index>()));
  }
  if (!in.done()) throw InputError("checkpoint has trailing bytes");

  const ModelKind kind = model_kind_from_string(header.at("model").get<std::string>());
  auto expect = [&](std::size_t count) {
    if (tensors.size() != count) throw InputError("checkpoint tensor count does not match model");
  };
  switch (kind) {
    case ModelKind::rescal: {
      RescalParams p;
      expect(1 + header.at("num_relations").get<std::size_t>());
      p.A = std::move(tensors[0]);
      p.R.assign(std::make_move_iterator(tensors.begin() + 1), std::make_move_iterator(tensors.end()));
      ckpt.params = std::move(p);
      break;
    }
    case ModelKind::transe: {
      expect(2);
      TransEParams p;
      p.A = std::move(tensors[0]);
      p.relations = std::move(tensors[1]);
      p.distance = distance_from_string(header.at("distance").get<std::string>());
      ckpt.params = std::move(p);
      break;
    }
    case ModelKind::mwnn: {
      expect(4);
      MwnnParams p;
      p.A = std::move(tensors[0]);
      p.relations = std::move(tensors[1]);
      p.W = std::move(tensors[2]);
      p.beta = tensors[3].col(0);
      p.keep_probability = header.at("keep_probability").get<double>();
      ckpt.params = std::move(p);
      break;
    }
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const CheckpointMeta& meta) {
  io::write_text(path, serialize_checkpoint(params, meta));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(io::read_text(path));
}

}  // namespace kgtc
