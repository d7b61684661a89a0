#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace epirenew {

struct ParamBlock {
  std::string name;
  int offset = 0;
  int size = 0;
};

/// Flat, deterministic parameter indexing: blocks are laid out in
/// registration order, so identical model specs produce identical layouts.
class ParameterLayout {
 public:
  /// Registers a block and returns its offset.
  int add(const std::string& name, int size) {
    if (size < 0) throw std::invalid_argument("block size must be nonnegative");
    for (const auto& b : blocks_) {
      if (b.name == name) throw std::invalid_argument("duplicate block: " + name);
    }
    blocks_.push_back({name, total_, size});
    total_ += size;
    return blocks_.back().offset;
  }

  int size() const { return total_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  const ParamBlock& block(const std::string& name) const {
    for (const auto& b : blocks_) {
      if (b.name == name) return b;
    }
    throw std::out_of_range("no parameter block named " + name);
  }

  bool has_block(const std::string& name) const {
    for (const auto& b : blocks_) {
      if (b.name == name) return true;
    }
    return false;
  }

  /// One name per scalar parameter: `block` for size-1 blocks, else
  /// `block[i]` with 0-based i.
  std::vector<std::string> param_names() const {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(total_));
    for (const auto& b : blocks_) {
      if (b.size == 1) {
        names.push_back(b.name);
        continue;
      }
      for (int i = 0; i < b.size; ++i) {
        names.push_back(b.name + "[" + std::to_string(i) + "]");
      }
    }
    return names;
  }

 private:
  std::vector<ParamBlock> blocks_;
  int total_ = 0;
};

}  // namespace epirenew
