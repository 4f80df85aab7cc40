#include "hiqa/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <json.hpp>

#include "hiqa/error.hpp"
#include "hiqa/simd/kernels.hpp"
#include "hiqa/text.hpp"

namespace hiqa {

double log_rank_score(std::size_t rank, std::size_t corpus_size, double gamma) {
  if (corpus_size < 2) throw InvalidParameter("log-rank score needs a corpus of at least 2 segments");
  if (rank < 1 || rank > corpus_size) throw InvalidParameter("rank out of range [1, N]");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidParameter("gamma must be > 0");
  const double num = std::log1p(gamma * static_cast<double>(rank - 1));
  const double den = std::log1p(gamma * static_cast<double>(corpus_size - 1));
  return 1.0 - num / den;
}

std::vector<EvalQuery> load_question_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open question bank " + path.string());
  std::vector<EvalQuery> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      const auto j = nlohmann::json::parse(line);
      EvalQuery q;
      q.query_id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      q.query = j.at("query").get<std::string>();
      q.relevant_keys = j.at("relevant").get<std::vector<std::string>>();
      if (j.contains("keywords")) {
        for (const auto& k : j.at("keywords")) q.user_keywords.insert(text::casefold(k.get<std::string>()));
      }
      if (q.relevant_keys.empty()) throw DataError(where + ": 'relevant' must not be empty");
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return out;
}

double evaluate_query(const std::vector<RankedResult>& ranking, const EvalQuery& query, double gamma) {
  if (query.relevant_keys.empty()) throw DataError("query '" + query.query_id + "' has no relevant keys");
  double total = 0.0;
  for (const auto& key : query.relevant_keys) {
    const auto it = std::find_if(ranking.begin(), ranking.end(),
                                 [&](const RankedResult& r) { return r.segment_key == key; });
    if (it == ranking.end()) throw DataError("relevant key '" + key + "' is not in the ranking");
    total += log_rank_score(it->rank, ranking.size(), gamma);
  }
  return total / static_cast<double>(query.relevant_keys.size());
}

EvalReport summarize(std::vector<std::pair<std::string, double>> scores, double gamma, std::size_t corpus_size) {
  EvalReport report;
  report.gamma = gamma;
  report.corpus_size = corpus_size;
  report.per_query_scores = std::move(scores);
  const auto& s = report.per_query_scores;
  if (s.empty()) return report;
  double sum = 0.0;
  report.max = -std::numeric_limits<double>::infinity();
  report.min = std::numeric_limits<double>::infinity();
  for (const auto& [_, v] : s) {
    sum += v;
    report.max = std::max(report.max, v);
    report.min = std::min(report.min, v);
  }
  report.mean = sum / static_cast<double>(s.size());
  double sq = 0.0;
  for (const auto& [_, v] : s) sq += (v - report.mean) * (v - report.mean);
  report.std = std::sqrt(sq / static_cast<double>(s.size()));
  return report;
}

EvalReport evaluate_dataset(const std::vector<EvalQuery>& queries, const Retriever& retriever,
                            const RetrievalConfig& cfg) {
  if (queries.empty()) throw DataError("question bank is empty");
  cfg.validate();
  std::vector<std::pair<std::string, double>> scores;
  scores.reserve(queries.size());
  for (const auto& q : queries) {
    try {
      const auto result = retriever.retrieve(q.query, cfg, q.user_keywords);
      scores.emplace_back(q.query_id, evaluate_query(result.ranking, q, cfg.gamma));
    } catch (const Error& e) {
      throw DataError("query '" + q.query_id + "': " + e.what());
    }
  }
  return summarize(std::move(scores), cfg.gamma, retriever.corpus_size());
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  return out + "\"";
}

}  // namespace

void write_report_csv(std::ostream& out, const EvalReport& report) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  out << "query_id,score\n";
  for (const auto& [id, score] : report.per_query_scores) out << csv_field(id) << ',' << score << '\n';
  out << "summary,mean,max,min,std,gamma,corpus_size\n";
  out << "summary," << report.mean << ',' << report.max << ',' << report.min << ',' << report.std << ','
      << report.gamma << ',' << report.corpus_size << '\n';
  out.flags(old_flags);
  out.precision(old_precision);
}

std::map<std::string, CohesionStats> cohesion_stats(const std::map<std::string, std::vector<Vector>>& groups) {
  std::map<std::string, CohesionStats> out;
  for (const auto& [group, vectors] : groups) {
    if (vectors.empty()) throw InvalidParameter("cohesion group '" + group + "' is empty");
    const std::size_t dim = vectors.front().size();
    std::vector<double> norms;
    norms.reserve(vectors.size());
    for (const auto& v : vectors) {
      if (v.size() != dim) throw InvalidParameter("cohesion group '" + group + "' mixes dimensions");
      norms.push_back(simd::norm(v));
      if (std::abs(norms.back() - 1.0) > 1e-4) {
        throw InvalidParameter("cohesion group '" + group + "' contains a non-unit vector");
      }
    }
    CohesionStats stats;
    stats.count = vectors.size();
    if (vectors.size() > 1) {
      double sum = 0.0;
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
          sum += simd::dot(vectors[i], vectors[j]) / (norms[i] * norms[j]);
        }
      }
      const double pairs = static_cast<double>(vectors.size()) * static_cast<double>(vectors.size() - 1) / 2.0;
      stats.mean_pairwise_cosine = sum / pairs;
    }
    std::vector<double> centroid(dim, 0.0);
    for (const auto& v : vectors) {
      for (std::size_t d = 0; d < dim; ++d) centroid[d] += v[d];
    }
    double sq = 0.0;
    for (double c : centroid) {
      const double m = c / static_cast<double>(vectors.size());
      sq += m * m;
    }
    stats.centroid_norm = std::sqrt(sq);
    out.emplace(group, stats);
  }
  return out;
}

Projection export_coordinates(const std::vector<LabeledVector>& vectors, ProjectionMethod method) {
  if (method != ProjectionMethod::pca2d) throw InvalidParameter("unsupported projection method");
  if (vectors.size() < 2) throw InvalidParameter("projection needs at least 2 vectors");
  const std::size_t dim = vectors.front().values.size();
  if (dim < 2) throw InvalidParameter("projection needs vectors of dimension >= 2");
  for (const auto& v : vectors) {
    if (v.values.size() != dim) throw InvalidParameter("projection input mixes dimensions");
  }
  const bool all_same = std::all_of(vectors.begin(), vectors.end(),
                                    [&](const LabeledVector& v) { return v.values == vectors.front().values; });
  if (all_same) throw InvalidParameter("projection needs at least 2 distinct vectors");

  const auto n = static_cast<Eigen::Index>(vectors.size());
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = vectors[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(j)];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("eigen decomposition failed");
  // Eigenvalues come out ascending.
  Eigen::MatrixXd basis(d, 2);
  Projection p;
  for (int c = 0; c < 2; ++c) {
    const Eigen::Index col = d - 1 - c;
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::abs(v(j)) > 1e-12) {
        if (v(j) < 0) v = -v;
        break;
      }
    }
    basis.col(c) = v;
    p.eigenvalues[c] = std::max(0.0, solver.eigenvalues()(col));
  }
  const double trace = cov.trace();
  p.explained_variance_ratio = trace > 0.0 ? (p.eigenvalues[0] + p.eigenvalues[1]) / trace : 0.0;

  const Eigen::MatrixXd coords = x * basis;
  p.rows.reserve(vectors.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = vectors[static_cast<std::size_t>(i)];
    p.rows.push_back({v.key, coords(i, 0), coords(i, 1), v.group});
  }
  return p;
}

}  // namespace hiqa
