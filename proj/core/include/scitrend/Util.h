#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace scitrend {

// Formats a double with enough digits to round-trip typical statistics while
// staying platform independent ("%.12g"). Used for every number we serialize
// so repeated runs produce byte-identical files.
std::string formatDouble(double value);

// FNV-1a 64-bit hash over raw bytes. Stable across platforms; used to
// fingerprint configs and stage outputs in the run manifest.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& text);
std::string toHex(std::uint64_t value);

std::uint64_t hashFile(const std::filesystem::path& path);

std::string trim(const std::string& text);
std::vector<std::string> splitCsvLine(const std::string& line);
std::string csvEscape(const std::string& field);

// Expands ${NAME} references against the process environment. Unset
// variables expand to the empty string.
std::string expandEnv(const std::string& text);

// Parses "key = value" lines; '#' starts a comment, blank lines are skipped,
// later keys override earlier ones. Values get ${ENV} expansion.
std::map<std::string, std::string> parseKeyValues(std::istream& input);
std::map<std::string, std::string> parseKeyValueFile(const std::filesystem::path& path);

}  // namespace scitrend
