#ifndef XCOM_CONFIG_HPP_
#define XCOM_CONFIG_HPP_

#include <filesystem>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "xcom/error.hpp"

namespace xcom {

// INI-style key/value configuration. Keys are addressed as "section.key";
// relative paths are resolved against the directory of the config file.
class Config {
 public:
  Config() = default;

  static Config Load(const std::filesystem::path& path) {
    Config cfg;
    try {
      boost::property_tree::ini_parser::read_ini(path.string(), cfg.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error(ErrorCode::kInvalidConfig, e.what());
    }
    cfg.base_dir_ = path.parent_path();
    return cfg;
  }

  static Config FromString(const std::string& text,
                           std::filesystem::path base_dir = {}) {
    Config cfg;
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, cfg.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error(ErrorCode::kInvalidConfig, e.what());
    }
    cfg.base_dir_ = std::move(base_dir);
    return cfg;
  }

  bool Has(const std::string& key) const {
    return tree_.get_optional<std::string>(key).has_value();
  }

  template <typename T>
  T Get(const std::string& key, const T& fallback) const {
    const auto raw = tree_.get_optional<std::string>(key);
    if (!raw) return fallback;
    try {
      return tree_.get<T>(key);
    } catch (const boost::property_tree::ptree_bad_data&) {
      throw Error(ErrorCode::kInvalidConfig,
                  "bad value for '" + key + "': " + *raw);
    }
  }

  std::string GetString(const std::string& key,
                        const std::string& fallback) const {
    return Get<std::string>(key, fallback);
  }

  std::filesystem::path GetPath(const std::string& key,
                                const std::filesystem::path& fallback) const {
    const auto raw = tree_.get_optional<std::string>(key);
    if (!raw) return fallback;
    std::filesystem::path p(*raw);
    if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
    return p;
  }

  template <typename T>
  void Set(const std::string& key, const T& value) {
    tree_.put(key, value);
  }

  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  boost::property_tree::ptree tree_;
  std::filesystem::path base_dir_;
};

}  // namespace xcom

#endif  // XCOM_CONFIG_HPP_
