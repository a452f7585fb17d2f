#include "emfend/model/gradcheck_suite.hpp"

#include "emfend/encoders/visual.hpp"
#include "emfend/model/em_fend.hpp"
#include "emfend/numerics/ops.hpp"

namespace emfend::model {

using corpus::EntityKind;

ModelConfig toy_gradcheck_config() {
  ModelConfig c;
  c.d = 8;
  c.heads = 2;
  c.L_max = 16;
  c.dropout = 0.0;
  c.encoder_layers = 1;
  c.vocab_size = 1024;
  c.d_visual = 6;
  c.seed = 7;
  c.consistency_gradient = true;
  return c;
}

std::vector<corpus::NewsPost> toy_gradcheck_posts(const ModelConfig& config) {
  std::vector<corpus::NewsPost> posts(2);
  posts[0].id = "toy-0";
  posts[0].text = {"senator", "arrested"};
  posts[0].ocr_text = {"breaking"};
  posts[0].textual_entities = {{{"senator"}, EntityKind::person, 1.0},
                               {{"arrested"}, EntityKind::context, 1.0}};
  posts[0].visual_entities = {{{"senator"}, EntityKind::person, 0.8},
                              {{"crowd"}, EntityKind::context, 0.6}};
  posts[0].label = corpus::kLabelReal;

  posts[1].id = "toy-1";
  posts[1].text = {"flood", "downtown"};
  posts[1].ocr_text = {"hoax"};
  posts[1].textual_entities = {{{"downtown"}, EntityKind::location, 1.0}};
  posts[1].visual_entities = {{{"harbor"}, EntityKind::location, 0.9},
                              {{"storm"}, EntityKind::context, 0.7}};
  posts[1].label = corpus::kLabelFake;

  for (auto& p : posts) {
    p.visual_regions = encoders::synth_visual_features(p.id, config.seed, config.d_visual, config.n_regions);
  }
  return posts;
}

numerics::GradCheckReport run_gradcheck_suite(const ModelConfig& config,
                                              const numerics::GradCheckOptions& options) {
  EmFend model(config);
  const std::vector<corpus::NewsPost> posts = toy_gradcheck_posts(config);
  return numerics::grad_check(
      [&] {
        numerics::Var total = model.loss(posts[0]);
        for (std::size_t i = 1; i < posts.size(); ++i) total = numerics::ops::add(total, model.loss(posts[i]));
        return total;
      },
      model.parameters(), options);
}

}  // namespace emfend::model
