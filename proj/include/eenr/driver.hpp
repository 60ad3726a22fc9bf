#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "eenr/pipeline.hpp"

namespace eenr::driver {

// One function per pipeline stage, shared by the CLI and the Python module.
// Each returns the JSON summary the CLI prints.

nlohmann::json gen_data(const Config& config, const std::string& out_dir);
nlohmann::json train_ee(const Config& config, const std::string& corpus_path,
                        const std::string& out_prefix);
nlohmann::json eval_ee(const std::string& model_prefix, const std::string& corpus_path);
nlohmann::json extract(const std::string& model_prefix, const std::string& news_path,
                       const std::string& out_path);
nlohmann::json build_graph_stage(const Config& config, const std::string& news_path,
                                 const std::string& impressions_path,
                                 const std::string& out_path);
nlohmann::json embed_graph(const Config& config, const std::string& graph_path,
                           const std::string& out_path);
nlohmann::json train_rec_stage(const Config& config, const std::string& news_path,
                               const std::string& impressions_path, const std::string& emb_path,
                               const std::string& variant_name, const std::string& out_prefix);
nlohmann::json evaluate_stage(const Config& config, const std::string& model_prefix,
                              const std::string& news_path, const std::string& impressions_path,
                              const std::string& emb_path, const std::string& predictions_path,
                              const std::string& auc_mode);
nlohmann::json ablate(const Config& config, const std::string& news_path,
                      const std::string& impressions_path, int n_seeds,
                      const std::string& out_dir, std::vector<std::string> variant_names);
nlohmann::json fraction_study(const Config& config, const std::string& news_path,
                              const std::string& impressions_path, int n_seeds,
                              const std::string& out_dir, std::vector<double> fractions,
                              std::vector<std::string> variant_names);

}  // namespace eenr::driver
