#include "recsteal/model.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "recsteal/rng.hpp"

namespace recsteal {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::BPR: return "bpr";
    case ModelKind::LMF: return "lmf";
    case ModelKind::GMF: return "gmf";
  }
  return "?";
}

std::optional<ModelKind> model_kind_from_string(std::string_view s) {
  if (s == "bpr" || s == "BPR") return ModelKind::BPR;
  if (s == "lmf" || s == "LMF") return ModelKind::LMF;
  if (s == "gmf" || s == "GMF" || s == "ncf" || s == "NCF") return ModelKind::GMF;
  return {};
}

double gmf_score(const GmfHead& head, std::span<const double> p, std::span<const double> q) {
  double s = head.b;
  for (std::size_t i = 0; i < p.size(); ++i) s += head.w[i] * p[i] * q[i];
  return s;
}

double EmbeddingModel::score(int user, int item) const {
  if (user < 0 || user >= num_users()) throw std::out_of_range("score: user index");
  if (item < 0 || item >= num_items()) throw std::out_of_range("score: item index");
  if (kind == ModelKind::GMF) return gmf_score(*head, P.row(user), Q.row(item));
  return dot(P.row(user), Q.row(item));
}

EmbeddingModel init_random(ModelKind kind, int num_users, int num_items, int dim,
                           std::uint64_t rng_seed) {
  if (num_users <= 0 || num_items <= 0 || dim <= 0) {
    throw std::invalid_argument("init_random: dimensions must be positive");
  }
  EmbeddingModel m;
  m.kind = kind;
  m.P = Matrix(num_users, dim);
  m.Q = Matrix(num_items, dim);
  Rng rng(rng_seed);
  const double half = 0.5 / static_cast<double>(dim);
  for (double& x : m.P.data) x = rng.uniform(-half, half);
  for (double& x : m.Q.data) x = rng.uniform(-half, half);
  if (kind == ModelKind::GMF) {
    m.head = GmfHead{std::vector<double>(static_cast<std::size_t>(dim), 1.0), 0.0};
  }
  return m;
}

RecommendationList top_k_from_scores(int user, std::span<const double> scores, int k,
                                     const std::vector<int>& exclude_sorted) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> candidates;
  candidates.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (!std::binary_search(exclude_sorted.begin(), exclude_sorted.end(), j)) {
      candidates.push_back(j);
    }
  }
  if (k < 0 || k > static_cast<int>(candidates.size())) {
    throw std::invalid_argument("top_k_from_scores: k exceeds candidate count");
  }
  auto better = [&scores](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(), better);
  candidates.resize(static_cast<std::size_t>(k));
  return RecommendationList{user, std::move(candidates)};
}

namespace {

nlohmann::json id_map_to_json(const IdMap& m) { return m.to_raw; }

IdMap id_map_from_json(const nlohmann::json& j) {
  IdMap m;
  for (const auto& s : j) m.intern(s.get<std::string>());
  return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  return nlohmann::json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols)) {
    throw std::runtime_error("model checkpoint: matrix size mismatch");
  }
  return m;
}

}  // namespace

void save_model(const EmbeddingModel& model, const std::string& path, const IdMap* user_ids,
                const IdMap* item_ids) {
  nlohmann::json j;
  j["format"] = "recsteal-model";
  j["version"] = 1;
  j["kind"] = to_string(model.kind);
  j["dim"] = model.dim();
  j["P"] = matrix_to_json(model.P);
  j["Q"] = matrix_to_json(model.Q);
  if (model.head) {
    j["gmf"] = nlohmann::json{{"w", model.head->w}, {"b", model.head->b}};
  } else {
    j["gmf"] = nullptr;
  }
  if (user_ids) j["user_ids"] = id_map_to_json(*user_ids);
  if (item_ids) j["item_ids"] = id_map_to_json(*item_ids);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model checkpoint: " + path);
  out << j.dump();
  if (!out) throw std::runtime_error("failed writing model checkpoint: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model checkpoint: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "recsteal-model" || j.value("version", 0) != 1) {
    throw std::runtime_error("unsupported model checkpoint format: " + path);
  }
  LoadedModel out;
  auto kind = model_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown model kind in checkpoint: " + path);
  out.model.kind = *kind;
  out.model.P = matrix_from_json(j.at("P"));
  out.model.Q = matrix_from_json(j.at("Q"));
  if (!j.at("gmf").is_null()) {
    out.model.head = GmfHead{j.at("gmf").at("w").get<std::vector<double>>(),
                             j.at("gmf").at("b").get<double>()};
  }
  if (j.contains("user_ids")) out.user_ids = id_map_from_json(j.at("user_ids"));
  if (j.contains("item_ids")) out.item_ids = id_map_from_json(j.at("item_ids"));
  return out;
}

}  // namespace recsteal
