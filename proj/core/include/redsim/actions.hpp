#pragma once

// Prerequisite-aware action masking and grounding of (action index, intent,
// belief) into a concrete environment action. Pure functions.

#include <array>
#include <vector>

#include "redsim/belief.hpp"
#include "redsim/intent.hpp"
#include "redsim/types.hpp"

namespace redsim {

using ActionMask = std::array<bool, kActionCount>;

// True iff `target` is a valid target for `action` under the kill-chain
// prerequisites as known to the belief.
bool is_valid_target(ActionId action, int target, const BeliefState& belief);

// All valid targets for `action`, ascending. Host ids for actions 1-8,
// subnet ids for action 0, empty for Sleep.
std::vector<int> valid_targets(ActionId action, const BeliefState& belief);

// mask[i] = true iff at least one valid target exists for action i.
// Sleep is always true, so the mask is never all-false.
ActionMask action_mask(const BeliefState& belief);

// Grounds a masked-in action index. The intent's target is honoured when it
// is a valid target for this action; otherwise the valid target with the
// lowest id is used. The source session is the lowest-id live session that
// can reach the target. Calling with a masked-out index is a caller bug and
// throws std::logic_error.
GroundedAction ground(ActionId index, const Intent* intent, const BeliefState& belief);

}  // namespace redsim
