#pragma once

#include <vector>

#include "emfend/corpus/news_post.hpp"
#include "emfend/model/config.hpp"
#include "emfend/numerics/grad_check.hpp"

namespace emfend::model {

/// d=8, 2 heads, one encoder layer, no dropout, small visual width. The
/// consistency features are differentiable so that finite differences and
/// the analytic gradient describe the same function.
ModelConfig toy_gradcheck_config();

/// Two posts with six composed tokens and two visual entities each.
std::vector<corpus::NewsPost> toy_gradcheck_posts(const ModelConfig& config);

/// Central finite differences of the summed loss over the toy posts,
/// against every trainable parameter of a freshly initialised model.
numerics::GradCheckReport run_gradcheck_suite(const ModelConfig& config = toy_gradcheck_config(),
                                              const numerics::GradCheckOptions& options = {});

}  // namespace emfend::model
