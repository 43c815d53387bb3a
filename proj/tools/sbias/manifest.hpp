#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace sbias {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// manifest.json written into the output directory of every command.
class RunManifest {
public:
    RunManifest(std::string command, std::filesystem::path out_dir);

    void set_config(nlohmann::json config) { config_ = std::move(config); }
    void add_input(const std::filesystem::path& path);
    /// `relative` is relative to the output directory.
    void add_output(const std::string& relative);
    const std::filesystem::path& out_dir() const { return out_dir_; }

    /// Records the time since the previous phase (or construction).
    void phase(const std::string& name);

    /// Throws when a listed output does not exist.
    void write() const;

private:
    using clock = std::chrono::steady_clock;

    std::string command_;
    std::filesystem::path out_dir_;
    nlohmann::json config_ = nlohmann::json::object();
    nlohmann::json inputs_ = nlohmann::json::array();
    std::vector<std::string> outputs_;
    nlohmann::json timings_ = nlohmann::json::array();
    clock::time_point started_;
    clock::time_point last_;
};

}  // namespace sbias
