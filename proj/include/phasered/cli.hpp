#pragma once

#include <map>
#include <string>
#include <vector>

#include "phasered/models.hpp"

namespace phasered {

/// Fully resolved run configuration: every key has a value and a
/// provenance tag (default | file | flag). Unknown keys are rejected at
/// parse time against the global key set plus the chosen model's
/// parameters.
class RunConfig {
  public:
    enum class Provenance { Default, File, Flag };

    static const std::vector<std::string>& global_keys();

    /// Line-oriented `key = value` text with '#' comments.
    static RunConfig parse(const std::string& text, Provenance prov = Provenance::File);

    void merge_file(const std::string& text);
    void set_flag(const std::string& key, const std::string& value);

    /// Fill unset keys from documented defaults; validates the model id
    /// and parameter names. Must be called before reading values.
    void resolve();

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    Provenance provenance(const std::string& key) const;

    ModelId model() const;
    std::map<std::string, double> model_params() const;

    /// Serialize the resolved config; re-parsing the result yields an
    /// identical config (round-trip).
    std::string serialize() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    void merge_text(const std::string& text, Provenance prov);
    void set(const std::string& key, const std::string& value, Provenance prov);
    void validate_key(const std::string& key) const;

    bool resolved_ = false;
    std::map<std::string, std::string> values_;
    std::map<std::string, Provenance> prov_;
};

/// Executes the configured command, writing CSV/manifest/SVG artifacts
/// into the output directory. Returns the process exit status:
/// 0 success, 2 config error, 3 solver failure, 4 validation threshold.
int run(RunConfig config, std::string* error_line = nullptr);

}  // namespace phasered
