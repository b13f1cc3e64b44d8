#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace resntk {

enum class ArchKind { Vanilla, ResNet, DenseNet };

std::string kind_name(ArchKind kind);
ArchKind kind_from_name(const std::string& name);

// Addresses one body weight matrix.
//   Vanilla : layer 1..L, sublayer 0
//   ResNet  : layer 1..L, sublayer 1..m   (branch position)
//   DenseNet: layer 1..L, sublayer 0..layer-1  (which earlier activation)
struct WeightIndex {
  std::size_t layer = 0;
  std::size_t sublayer = 0;
  bool operator==(const WeightIndex&) const = default;
};

struct ArchitectureSpec {
  ArchKind kind = ArchKind::Vanilla;
  std::size_t input_dim = 1;
  std::size_t depth = 1;         // L
  std::size_t width = 1;         // n, constant across layers
  std::size_t branch_depth = 2;  // m, ResNet only
  // ResNet: one positive coefficient per layer. DenseNet: a single positive
  // coefficient. Vanilla: empty.
  std::vector<double> alphas;
  // When set, forward computes the reduced network: every connection
  // bypassing the indexed weight matrix is removed.
  std::optional<WeightIndex> reduction;

  double alpha(std::size_t layer) const;
};

// Validates all invariants; throws InvalidSpec with a field-level message.
ArchitectureSpec build_arch(ArchitectureSpec raw);

ArchitectureSpec make_vanilla(std::size_t input_dim, std::size_t depth,
                              std::size_t width);
ArchitectureSpec make_resnet(std::size_t input_dim, std::size_t depth,
                             std::size_t width, std::size_t branch_depth,
                             std::vector<double> alphas);
ArchitectureSpec make_resnet(std::size_t input_dim, std::size_t depth,
                             std::size_t width, std::size_t branch_depth,
                             double alpha);
ArchitectureSpec make_densenet(std::size_t input_dim, std::size_t depth,
                               std::size_t width, double alpha);

void validate_index(const ArchitectureSpec& spec, const WeightIndex& k);

// Spec of the network with all connections bypassing weight k removed.
// Vanilla networks are returned unchanged (every path already crosses every
// layer). Weights are shared with the original spec: only wiring changes.
ArchitectureSpec reduce(const ArchitectureSpec& spec, const WeightIndex& k);

// Flat enumeration of the body matrices, in a fixed canonical order.
std::size_t body_matrix_count(const ArchitectureSpec& spec);
std::size_t body_flat_index(const ArchitectureSpec& spec, const WeightIndex& k);
WeightIndex body_index_at(const ArchitectureSpec& spec, std::size_t flat);
std::vector<WeightIndex> body_indices(const ArchitectureSpec& spec);

nlohmann::json arch_to_json(const ArchitectureSpec& spec);
ArchitectureSpec arch_from_json(const nlohmann::json& j);

}  // namespace resntk
