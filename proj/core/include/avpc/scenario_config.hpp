#pragma once

#include <string>
#include <vector>

#include "avpc/geometry.hpp"
#include "avpc/kinematic_model.hpp"
#include "avpc/low_level_control.hpp"
#include "avpc/mpc_planner.hpp"
#include "avpc/obstacle.hpp"
#include "avpc/vehicle_9dof.hpp"
#include "avpc/velocity_planner.hpp"

namespace avpc {

/**
 * @brief Full closed-loop scenario description.
 *
 * Loadable from an INI-style text file ([section] headers, key = value
 * pairs, '#' comments). Unknown sections or keys are rejected. Track and
 * obstacle files referenced by the scenario are loaded eagerly; tests may
 * instead fill track_points / obstacles directly.
 */
struct ScenarioConfig {
    // [scenario]
    std::string track_file;
    std::string obstacle_file;  ///< optional
    double duration = 40.0;     ///< [s]
    int seed = 0;               ///< reserved, unused by the core

    // [initial]
    double initial_speed = 15.0;  ///< V_x0 [m/s]
    double initial_s = 0.0;       ///< start arc length on the track [m]

    // [rates]
    double plant_dt = 1e-3;
    double control_dt = 1e-2;
    double planner_dt = 1e-1;

    // [path]
    double resample_spacing = 1.0;

    KbmParams kinematic;           // [kinematic]
    PlantParams plant;             // [plant] + [tire]
    MpcConfig mpc;                 // [mpc]
    ControlGains gains;            // [pid]
    VelocityPlannerConfig velocity;   // [velocity_planner]
    ObstacleConfig obstacle_manager;  // [obstacle_manager]

    // Loaded geometry.
    std::vector<Vec2> track_points;
    std::vector<Obstacle> obstacles;

    static ScenarioConfig from_file(const std::string& filename);

    /// Throws std::invalid_argument when rates do not divide evenly or any
    /// sub-config is invalid.
    void validate() const;
};

}  // namespace avpc
