#pragma once

#include <map>
#include <optional>
#include <string>

#include "kxdoc/pipeline.hpp"
#include "kxdoc/retrieval.hpp"
#include "kxdoc/synth.hpp"
#include "kxdoc/train.hpp"

namespace kxdoc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key-value config file: `key = value` lines, optional [section] headers
// that prefix following keys with "section.", '#' comments. Values may be
// quoted.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

enum class Setting { Closed, Open };

// One run's full configuration; every named hyperparameter has a config key.
struct RunConfig {
    Setting setting = Setting::Closed;
    PipelineConfig pipeline;
    TrainConfig train;
    RetrievalConfig retrieval;
    std::string data_root;  // from --data-root or KXDOC_DATA_ROOT
};

// Applies a parsed config file over defaults. Unknown keys are errors so typos
// do not pass silently.
RunConfig run_config_from(const KeyValueConfig& kv);

}  // namespace kxdoc
