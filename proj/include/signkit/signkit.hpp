#pragma once

#include "signkit/core/h1x55.hpp"
#include "signkit/core/kinematics.hpp"
#include "signkit/core/motion.hpp"
#include "signkit/core/robot_model.hpp"
#include "signkit/core/rotation.hpp"
#include "signkit/core/smplx_skeleton.hpp"
#include "signkit/data/synthetic.hpp"
#include "signkit/eval/episode.hpp"
#include "signkit/eval/metrics.hpp"
#include "signkit/io/json_io.hpp"
#include "signkit/io/run_config.hpp"
#include "signkit/learn/gaussian.hpp"
#include "signkit/learn/mlp.hpp"
#include "signkit/learn/normalizer.hpp"
#include "signkit/learn/ppo.hpp"
#include "signkit/learn/tasks.hpp"
#include "signkit/learn/trainer.hpp"
#include "signkit/retarget/body.hpp"
#include "signkit/retarget/hand.hpp"
#include "signkit/sim/env.hpp"
#include "signkit/sim/randomization.hpp"
#include "signkit/sim/rewards.hpp"
#include "signkit/tokenizer/vq.hpp"
#include "signkit/trajectory/jerk.hpp"
#include "signkit/trajectory/stream.hpp"
#include "signkit/pipeline.hpp"
