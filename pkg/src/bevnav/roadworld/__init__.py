"""Procedural road world: maps, kinematics, rendering, datasets."""

from .dataset import (
    CruiseController,
    Trajectory,
    TrajectoryRecord,
    collect_trajectory,
    read_dataset,
    read_manifest,
    read_pgm,
    read_ppm,
    sample_road_pose,
    write_dataset,
    write_pgm,
    write_ppm,
)
from .dynamics import (
    Action,
    RobotPose,
    curb_collision,
    step_dynamics,
    wrap_angle,
)
from .geometry import (
    CLASSES,
    CROSS,
    CURVE,
    DEAD_END,
    EMPTY,
    STRAIGHT,
    TEE,
    TileMap,
    local_class,
    make_waypoints,
    straight_corridor,
    uniform_map,
)
from .render import (
    BEV_RANGE_DEFAULT,
    BEV_SIZE_DEFAULT,
    RenderStyle,
    make_styles,
    render_bev,
    render_fpv,
)

__all__ = [
    "Action",
    "RobotPose",
    "TileMap",
    "Trajectory",
    "TrajectoryRecord",
    "RenderStyle",
    "CruiseController",
    "CLASSES",
    "EMPTY",
    "STRAIGHT",
    "CURVE",
    "TEE",
    "CROSS",
    "DEAD_END",
    "BEV_RANGE_DEFAULT",
    "BEV_SIZE_DEFAULT",
    "wrap_angle",
    "step_dynamics",
    "curb_collision",
    "local_class",
    "make_waypoints",
    "straight_corridor",
    "uniform_map",
    "make_styles",
    "render_bev",
    "render_fpv",
    "sample_road_pose",
    "collect_trajectory",
    "write_dataset",
    "read_dataset",
    "read_manifest",
    "write_pgm",
    "write_ppm",
    "read_pgm",
    "read_ppm",
]
