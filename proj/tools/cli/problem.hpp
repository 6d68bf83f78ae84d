#pragma once

#include "config.hpp"

#include "copar/copar.hpp"

#include <optional>
#include <random>

namespace copar::cli {

/// Field from a catalog expression:
///   const:v[,v...]            constant components (one value broadcasts; matrices become v I)
///   poly:c0,cx,cy,ct          c0 + cx x + cy y + ct t
///   trig:c0,amp,kx,ky,kt,ph   c0 + amp cos(kx pi x + ph) cos(ky pi y) cos(kt t)
///   bump:amp,kt               amp sin(pi x) [sin(pi y)] cos(kt t), zero on the boundary
///   random:c0,amp             c0 + amp times a smooth wave drawn from the seeded generator
///   file:PATH                 field file (text or binary encoding)
/// Scalar expressions fill every vector component or scale the identity matrix.
SpaceTimeField make_field(const std::string& expr, FieldKind kind, const Mesh& mesh, TimeGrid grid,
                          const std::filesystem::path& base_dir, std::mt19937_64& rng);

std::shared_ptr<const Mesh> make_mesh(const RunConfig& c);
TimeGrid field_grid(const RunConfig& c);

/// Problem data assembled from a configuration.
struct LoadedProblem {
  Problem problem;
  std::optional<MmsSolution> exact;
};

CoefficientSextet load_sextet(const RunConfig& c, std::shared_ptr<const Mesh> mesh, std::mt19937_64& rng);
LoadedProblem load_problem(const RunConfig& c, std::uint64_t seed);

/// Configuration overrides where present, discrete constants otherwise.
EmbeddingConstants embedding_constants(const RunConfig& c, const DiscreteSpaces& sp);

}  // namespace copar::cli
