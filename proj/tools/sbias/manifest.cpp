#include "manifest.hpp"

#include "survbias/error.hpp"
#include "survbias/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#ifndef SBIAS_VERSION
#define SBIAS_VERSION "0.0.0"
#endif

namespace sbias {

using survbias::Error;
using survbias::ErrorCode;

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::InvalidInput, "sha256 unavailable");
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

RunManifest::RunManifest(std::string command, std::filesystem::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)), started_(clock::now()), last_(started_) {}

void RunManifest::add_input(const std::filesystem::path& path) {
    inputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void RunManifest::add_output(const std::string& relative) { outputs_.push_back(relative); }

void RunManifest::phase(const std::string& name) {
    auto now = clock::now();
    timings_.push_back({{"phase", name}, {"seconds", std::chrono::duration<double>(now - last_).count()}});
    last_ = now;
}

void RunManifest::write() const {
    for (const auto& o : outputs_)
        if (!std::filesystem::exists(out_dir_ / o))
            throw Error(ErrorCode::FileUnreadable, "declared output missing: " + o);
    nlohmann::json j = {
        {"tool", "sbias"},
        {"version", SBIAS_VERSION},
        {"command", command_},
        {"config", config_},
        {"inputs", inputs_},
        {"outputs", outputs_},
        {"timings", timings_},
        {"total_seconds", std::chrono::duration<double>(clock::now() - started_).count()},
    };
    survbias::report::write_text(out_dir_ / "manifest.json", j.dump(1) + "\n");
}

}  // namespace sbias
