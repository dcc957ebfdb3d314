/*
 * Persistence of the canonical registration table between CLI runs:
 * a versioned, line-oriented format with deterministic bytes so
 * re-ingesting the same dumps reproduces the file exactly.
 */
#pragma once

#include "ipaudit/prefix_store.hpp"
#include "ipaudit/registry.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ipaudit {

void save_snapshot(const std::filesystem::path& file, const std::vector<Registration>& regs);
std::string snapshot_text(const std::vector<Registration>& regs);

std::vector<Registration> load_snapshot(const std::filesystem::path& file);
std::vector<Registration> snapshot_from_text(const std::string& text, const std::string& origin);

// Radix trie over every prefix of every registration, handle = id.
PrefixStore build_store(const std::vector<Registration>& regs);

} // namespace ipaudit
