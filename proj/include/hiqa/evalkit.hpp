#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "hiqa/embedder.hpp"
#include "hiqa/retriever.hpp"

namespace hiqa {

/// 1 - ln(1 + gamma (r - 1)) / ln(1 + gamma (N - 1)).
/// Requires 1 <= rank <= N, N >= 2 and gamma > 0; throws InvalidParameter otherwise.
double log_rank_score(std::size_t rank, std::size_t corpus_size, double gamma);

struct EvalQuery {
  std::string query_id;
  std::string query;
  std::vector<std::string> relevant_keys;
  std::set<std::string> user_keywords;
};

/// One object per line: {"id", "query", "relevant": ["doc#seg", ...], "keywords": [...]}.
/// Blank lines are skipped. Throws DataError with the line number on bad input.
std::vector<EvalQuery> load_question_bank(const std::filesystem::path& path);

/// Mean log-rank score over the query's relevant keys, with N = ranking size.
/// Throws DataError if a relevant key is absent from the ranking.
double evaluate_query(const std::vector<RankedResult>& ranking, const EvalQuery& query, double gamma);

struct EvalReport {
  std::vector<std::pair<std::string, double>> per_query_scores;  // in question-bank order
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  double std = 0.0;  // population
  double gamma = 1.0;
  std::size_t corpus_size = 0;
};

/// Mean, max, min and population standard deviation of the scores.
EvalReport summarize(std::vector<std::pair<std::string, double>> scores, double gamma, std::size_t corpus_size);

/// Retrieves a full ranking per query and scores it. Errors are rethrown as
/// DataError prefixed with the query id.
EvalReport evaluate_dataset(const std::vector<EvalQuery>& queries, const Retriever& retriever,
                            const RetrievalConfig& cfg);

/// Writes "query_id,score" rows and a final "summary" block.
void write_report_csv(std::ostream& out, const EvalReport& report);

struct CohesionStats {
  std::optional<double> mean_pairwise_cosine;  // empty for a singleton group
  double centroid_norm = 0.0;
  std::size_t count = 0;
};

/// Per group: mean cosine over unordered pairs and the norm of the centroid.
/// Every vector must have unit norm (within 1e-4); throws InvalidParameter otherwise.
std::map<std::string, CohesionStats> cohesion_stats(const std::map<std::string, std::vector<Vector>>& groups);

struct LabeledVector {
  std::string key;
  std::string group;
  Vector values;
};

struct CoordinateRow {
  std::string key;
  double x = 0.0;
  double y = 0.0;
  std::string group;
};

struct Projection {
  std::vector<CoordinateRow> rows;
  double eigenvalues[2] = {0.0, 0.0};
  double explained_variance_ratio = 0.0;  // (l1 + l2) / trace
};

enum class ProjectionMethod { pca2d };

/// Projects centred vectors onto the top two eigenvectors of their
/// covariance. Each eigenvector's first nonzero component is made positive.
/// Throws InvalidParameter with fewer than two distinct vectors.
Projection export_coordinates(const std::vector<LabeledVector>& vectors,
                              ProjectionMethod method = ProjectionMethod::pca2d);

}  // namespace hiqa
