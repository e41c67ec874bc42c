#pragma once

#include <string>
#include <vector>

namespace prodyn::scenegen {

/// Writers for the scenes shipped with the project. Each creates a
/// self-contained directory (meshes, hierarchy manifest, scene config)
/// under `root` and returns the scene-config path(s).

/// 2D soft ball dropped onto an off-center sharp spike; three independent
/// disk discretizations (~60/130/330 vertices).
std::string ballOnSpike(const std::string& root);

/// Comb-shaped body dropped on the ground at a large time step over a
/// 4-level hierarchy; one config per consistency weight.
std::vector<std::string> slitArray(const std::string& root,
                                   const std::vector<double>& weights = {0.0, 0.025, 0.2});

/// Very coarse polygon ball over a fine round ball resting on the ground;
/// the embedded upsampling of the polygon dips below the floor.
std::string tightContact(const std::string& root);

/// Three disks with a ~22x vertex spread for preview-speedup reporting.
std::string previewSpeedup(const std::string& root);

/// Two identical levels of a ball-on-ground contact scene (the degenerate
/// hierarchy whose prolongation is the identity).
std::string identityBall(const std::string& root);

/// Small 3D block dropped on the ground over a 2-level jittered hierarchy.
std::string boxDrop3D(const std::string& root);

/// Everything above; returns all scene-config paths.
std::vector<std::string> writeAllScenes(const std::string& root);

}  // namespace prodyn::scenegen
