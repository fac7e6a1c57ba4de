#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "borglev/dtn.hpp"
#include "borglev/spectral.hpp"

namespace borglev {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double v);

/// Comma-separated table with a fixed header; every row must match its width.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    CsvTable& row(std::vector<std::string> cells);
    std::string str() const;
    void write(const fs::path& path) const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(long long v);
std::string cell(int v);
std::string cell(Index v);
std::string cell(bool v);
std::string cell(const std::string& v);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void write_json(const fs::path& path, const json& j);

std::string sha256_hex(const std::string& data);

/// grid.json-style description of a grid.
json grid_to_json(const GridSpec& grid);

/// CSV of the DtN matrix entries (row, col, re, im) plus a .json sibling with its metadata.
void export_dtn(const DtnMatrix& dtn, const fs::path& path);

/// Writes spectral.json (header with payload hashes), spectral.csv (k, lambda, trace re/im pairs)
/// and, when present, eigenvectors.csv into dir.
void save_spectral(const SpectralData& sd, const fs::path& dir);
/// Reads a directory written by save_spectral; payload hashes must match the header.
SpectralData load_spectral(const fs::path& dir);

enum class CacheStatus { Hit, Miss, Recomputed };
std::string to_string(CacheStatus s);

/// Content-addressed store of spectral data under root/<key>.
class SpectralCache {
public:
    explicit SpectralCache(fs::path root);
    /// BORGLEV_CACHE_DIR, else $XDG_CACHE_HOME/borglev, else ~/.cache/borglev.
    static fs::path default_root();

    const fs::path& root() const { return root_; }
    fs::path entry(const std::string& key) const { return root_ / key; }
    /// Cached data if present and intact; sets `corrupt` when an entry existed but failed verification.
    std::optional<SpectralData> load(const std::string& key, bool* corrupt = nullptr) const;
    void store(const std::string& key, const SpectralData& sd) const;

private:
    fs::path root_;
};

} // namespace borglev
