#include "tlf/config.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tlf/errors.hpp"

namespace tlf {

namespace pt = boost::property_tree;

namespace {

template <typename T>
void read_key(const pt::ptree& tree, const char* key, T& value) {
  // get_optional would swallow unparsable values; get_value throws instead.
  if (auto node = tree.get_child_optional(key)) value = node->get_value<T>();
}

}  // namespace

TlfConfig parse_tlf_config(std::istream& in, TlfConfig cfg) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
    read_key(tree, "forest.trees", cfg.trees);
    read_key(tree, "forest.min_leaf_size_small", cfg.min_leaf_size_small);
    read_key(tree, "forest.min_leaf_size_large", cfg.min_leaf_size_large);
    read_key(tree, "forest.large_threshold", cfg.large_threshold);
    read_key(tree, "pivot.threshold", cfg.pivot_threshold);
    read_key(tree, "adapt.ridge", cfg.reg.ridge);
    read_key(tree, "adapt.mmd", cfg.reg.mmd);
    read_key(tree, "adapt.manifold", cfg.reg.manifold);
    if (auto v = tree.get_optional<std::string>("adapt.kernel")) cfg.kernel = parse_kernel_kind(*v);
    if (auto v = tree.get_optional<std::string>("adapt.alpha_mode")) cfg.alpha_mode = parse_alpha_mode(*v);
    if (auto v = tree.get_optional<std::string>("adapt.mmd_cross_term")) cfg.cross_term = parse_cross_term(*v);
    read_key(tree, "run.seed", cfg.seed);
  } catch (const pt::ptree_error& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

TlfConfig load_tlf_config(const std::filesystem::path& path, TlfConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  return parse_tlf_config(in, base);
}

void write_tlf_config(std::ostream& out, const TlfConfig& cfg) {
  out << "# TLF configuration\n\n"
      << "[forest]\n"
      << "# trees per forest\n"
      << "trees = " << cfg.trees << "\n"
      << "# minimum leaf size for datasets with at most large_threshold records\n"
      << "min_leaf_size_small = " << cfg.min_leaf_size_small << "\n"
      << "# minimum leaf size for datasets with more than large_threshold records\n"
      << "min_leaf_size_large = " << cfg.min_leaf_size_large << "\n"
      << "large_threshold = " << cfg.large_threshold << "\n\n"
      << "[pivot]\n"
      << "# leaf distributions match when their base-2 Jensen-Shannon divergence is below this\n"
      << "threshold = " << cfg.pivot_threshold << "\n\n"
      << "[adapt]\n"
      << "# ridge, MMD and manifold regularization weights\n"
      << "ridge = " << cfg.reg.ridge << "\n"
      << "mmd = " << cfg.reg.mmd << "\n"
      << "manifold = " << cfg.reg.manifold << "\n"
      << "# linear | rbf\n"
      << "kernel = " << to_string(cfg.kernel) << "\n"
      << "# literal: alpha = ridge*I + (mmd*M + manifold*L)K ; inverse: the inverse of that matrix\n"
      << "alpha_mode = " << to_string(cfg.alpha_mode) << "\n"
      << "# product: -1/(n_c m_c) ; squared: -1/(n_c^2 m_c^2)\n"
      << "mmd_cross_term = " << to_string(cfg.cross_term) << "\n\n"
      << "[run]\n"
      << "seed = " << cfg.seed << "\n";
}

}  // namespace tlf
