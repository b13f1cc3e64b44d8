#include "resntk/arch.hpp"

#include <utility>

#include "resntk/errors.hpp"

namespace resntk {

std::string kind_name(ArchKind kind) {
  switch (kind) {
    case ArchKind::Vanilla: return "vanilla";
    case ArchKind::ResNet: return "resnet";
    case ArchKind::DenseNet: return "densenet";
  }
  return "vanilla";
}

ArchKind kind_from_name(const std::string& name) {
  if (name == "vanilla") return ArchKind::Vanilla;
  if (name == "resnet") return ArchKind::ResNet;
  if (name == "densenet") return ArchKind::DenseNet;
  throw InvalidSpec("kind: unknown architecture '" + name + "'");
}

double ArchitectureSpec::alpha(std::size_t layer) const {
  if (kind == ArchKind::DenseNet) return alphas.at(0);
  return alphas.at(layer - 1);
}

ArchitectureSpec build_arch(ArchitectureSpec raw) {
  if (raw.input_dim < 1) throw InvalidSpec("input_dim: must be >= 1");
  if (raw.depth < 1) throw InvalidSpec("depth: must be >= 1");
  if (raw.width < 1) throw InvalidSpec("width: must be >= 1");
  switch (raw.kind) {
    case ArchKind::Vanilla:
      raw.alphas.clear();
      break;
    case ArchKind::ResNet:
      if (raw.branch_depth < 2) {
        throw InvalidSpec("branch_depth: ResNet requires m >= 2");
      }
      if (raw.alphas.size() != raw.depth) {
        throw InvalidSpec("alphas: ResNet requires exactly depth coefficients");
      }
      for (std::size_t l = 0; l < raw.alphas.size(); ++l) {
        if (!(raw.alphas[l] > 0.0)) {
          throw InvalidSpec("alphas[" + std::to_string(l) +
                            "]: must be positive");
        }
      }
      break;
    case ArchKind::DenseNet:
      if (raw.alphas.size() != 1 || !(raw.alphas[0] > 0.0)) {
        throw InvalidSpec("alphas: DenseNet requires a single positive alpha");
      }
      break;
  }
  if (raw.reduction) validate_index(raw, *raw.reduction);
  return raw;
}

ArchitectureSpec make_vanilla(std::size_t input_dim, std::size_t depth,
                              std::size_t width) {
  ArchitectureSpec s;
  s.kind = ArchKind::Vanilla;
  s.input_dim = input_dim;
  s.depth = depth;
  s.width = width;
  return build_arch(std::move(s));
}

ArchitectureSpec make_resnet(std::size_t input_dim, std::size_t depth,
                             std::size_t width, std::size_t branch_depth,
                             std::vector<double> alphas) {
  ArchitectureSpec s;
  s.kind = ArchKind::ResNet;
  s.input_dim = input_dim;
  s.depth = depth;
  s.width = width;
  s.branch_depth = branch_depth;
  s.alphas = std::move(alphas);
  return build_arch(std::move(s));
}

ArchitectureSpec make_resnet(std::size_t input_dim, std::size_t depth,
                             std::size_t width, std::size_t branch_depth,
                             double alpha) {
  return make_resnet(input_dim, depth, width, branch_depth,
                     std::vector<double>(depth, alpha));
}

ArchitectureSpec make_densenet(std::size_t input_dim, std::size_t depth,
                               std::size_t width, double alpha) {
  ArchitectureSpec s;
  s.kind = ArchKind::DenseNet;
  s.input_dim = input_dim;
  s.depth = depth;
  s.width = width;
  s.alphas = {alpha};
  return build_arch(std::move(s));
}

void validate_index(const ArchitectureSpec& spec, const WeightIndex& k) {
  if (k.layer < 1 || k.layer > spec.depth) {
    throw InvalidIndex("weight index: layer out of range");
  }
  switch (spec.kind) {
    case ArchKind::Vanilla:
      if (k.sublayer != 0) {
        throw InvalidIndex("weight index: vanilla sublayer must be 0");
      }
      break;
    case ArchKind::ResNet:
      if (k.sublayer < 1 || k.sublayer > spec.branch_depth) {
        throw InvalidIndex("weight index: resnet sublayer out of range");
      }
      break;
    case ArchKind::DenseNet:
      if (k.sublayer >= k.layer) {
        throw InvalidIndex("weight index: densenet sublayer must be < layer");
      }
      break;
  }
}

ArchitectureSpec reduce(const ArchitectureSpec& spec, const WeightIndex& k) {
  validate_index(spec, k);
  ArchitectureSpec out = spec;
  if (spec.kind == ArchKind::Vanilla) return out;  // every path crosses k
  out.reduction = k;
  return out;
}

std::size_t body_matrix_count(const ArchitectureSpec& spec) {
  switch (spec.kind) {
    case ArchKind::Vanilla: return spec.depth;
    case ArchKind::ResNet: return spec.depth * spec.branch_depth;
    case ArchKind::DenseNet: return spec.depth * (spec.depth + 1) / 2;
  }
  return 0;
}

std::size_t body_flat_index(const ArchitectureSpec& spec,
                            const WeightIndex& k) {
  validate_index(spec, k);
  switch (spec.kind) {
    case ArchKind::Vanilla: return k.layer - 1;
    case ArchKind::ResNet:
      return (k.layer - 1) * spec.branch_depth + (k.sublayer - 1);
    case ArchKind::DenseNet: return k.layer * (k.layer - 1) / 2 + k.sublayer;
  }
  return 0;
}

WeightIndex body_index_at(const ArchitectureSpec& spec, std::size_t flat) {
  if (flat >= body_matrix_count(spec)) {
    throw InvalidIndex("body_index_at: flat index out of range");
  }
  switch (spec.kind) {
    case ArchKind::Vanilla: return {flat + 1, 0};
    case ArchKind::ResNet:
      return {flat / spec.branch_depth + 1, flat % spec.branch_depth + 1};
    case ArchKind::DenseNet: {
      std::size_t layer = 1;
      while (layer * (layer + 1) / 2 <= flat) ++layer;
      return {layer, flat - layer * (layer - 1) / 2};
    }
  }
  return {};
}

std::vector<WeightIndex> body_indices(const ArchitectureSpec& spec) {
  std::vector<WeightIndex> out;
  const std::size_t count = body_matrix_count(spec);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(body_index_at(spec, i));
  return out;
}

nlohmann::json arch_to_json(const ArchitectureSpec& spec) {
  nlohmann::json j;
  j["kind"] = kind_name(spec.kind);
  j["input_dim"] = spec.input_dim;
  j["depth"] = spec.depth;
  j["width"] = spec.width;
  if (spec.kind == ArchKind::ResNet) {
    j["branch_depth"] = spec.branch_depth;
    j["alphas"] = spec.alphas;
  } else if (spec.kind == ArchKind::DenseNet) {
    j["alphas"] = spec.alphas[0];
  }
  if (spec.reduction) {
    j["reduction"] = {{"layer", spec.reduction->layer},
                      {"sublayer", spec.reduction->sublayer}};
  }
  return j;
}

ArchitectureSpec arch_from_json(const nlohmann::json& j) {
  ArchitectureSpec s;
  s.kind = kind_from_name(j.at("kind").get<std::string>());
  s.input_dim = j.at("input_dim").get<std::size_t>();
  s.depth = j.at("depth").get<std::size_t>();
  s.width = j.at("width").get<std::size_t>();
  if (j.contains("branch_depth")) {
    s.branch_depth = j.at("branch_depth").get<std::size_t>();
  }
  if (j.contains("alphas")) {
    const auto& a = j.at("alphas");
    if (a.is_array()) {
      s.alphas = a.get<std::vector<double>>();
    } else {
      s.alphas = {a.get<double>()};
    }
  }
  if (s.kind == ArchKind::ResNet && s.alphas.size() == 1 && s.depth > 1) {
    s.alphas.assign(s.depth, s.alphas[0]);
  }
  if (j.contains("reduction") && !j.at("reduction").is_null()) {
    WeightIndex k;
    k.layer = j.at("reduction").at("layer").get<std::size_t>();
    k.sublayer = j.at("reduction").at("sublayer").get<std::size_t>();
    s.reduction = k;
  }
  return build_arch(std::move(s));
}

}  // namespace resntk
