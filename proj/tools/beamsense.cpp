// beamsense CLI: dataset generation, environment sensing, and the
// pretrain/fine-tune experiment flow. Links only the C API.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beamsense/beamsense.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "plain-text key=value config file");
  cmd->add_option("--seed", args.seed, "master seed (overrides the config)");
  cmd->add_option("--set", args.overrides, "extra key=value overrides")->expected(-1);
}

bs_config* make_config(const CommonArgs& args) {
  bs_config* cfg = nullptr;
  bs_status st = args.config_path.empty() ? bs_config_create(&cfg)
                                          : bs_config_load(args.config_path.c_str(), &cfg);
  if (st != BS_OK) {
    std::fprintf(stderr, "beamsense: %s: %s\n", bs_status_name(st), bs_last_error_message());
    return nullptr;
  }
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "beamsense: --set expects key=value, got '%s'\n", kv.c_str());
      bs_config_destroy(cfg);
      return nullptr;
    }
    st = bs_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != BS_OK) {
      std::fprintf(stderr, "beamsense: %s: %s\n", bs_status_name(st), bs_last_error_message());
      bs_config_destroy(cfg);
      return nullptr;
    }
  }
  if (!args.seed.empty()) {
    if (bs_config_set(cfg, "seed", args.seed.c_str()) != BS_OK) {
      bs_config_destroy(cfg);
      return nullptr;
    }
  }
  return cfg;
}

int finish(bs_config* cfg, bs_status st, const char* done_msg) {
  bs_config_destroy(cfg);
  if (st != BS_OK) {
    std::fprintf(stderr, "beamsense: %s: %s\n", bs_status_name(st), bs_last_error_message());
    return 1;
  }
  std::printf("%s\n", done_msg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smart-factory beam prediction workbench"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string mode = "single";
  std::string out_dir = "out";
  std::string dataset_dir;
  std::string model_dir;
  std::string path_dir;

  CLI::App* generate = app.add_subcommand("generate", "generate a synthetic dataset");
  add_common(generate, args);
  generate->add_option("--mode", mode, "single or multi")->check(CLI::IsMember({"single", "multi"}));
  generate->add_option("--out", out_dir, "output dataset directory")->required();

  CLI::App* pretrain = app.add_subcommand("pretrain", "pre-train on a multi-environment dataset");
  add_common(pretrain, args);
  pretrain->add_option("--dataset", dataset_dir, "multi-environment dataset directory")->required();
  pretrain->add_option("--out", out_dir, "model/report output directory")->required();

  CLI::App* finetune = app.add_subcommand("finetune", "fine-tune vs retrain on a target dataset");
  add_common(finetune, args);
  finetune->add_option("--pretrained", model_dir, "pre-trained model directory")->required();
  finetune->add_option("--dataset", dataset_dir, "target-environment dataset directory")->required();
  finetune->add_option("--out", out_dir, "report output directory")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a model on a dataset");
  add_common(evaluate, args);
  evaluate->add_option("--model", model_dir, "model directory")->required();
  evaluate->add_option("--dataset", dataset_dir, "dataset directory")->required();
  evaluate->add_option("--out", out_dir, "metrics JSON path")->required();

  CLI::App* sense = app.add_subcommand("sense", "dynamic scatterer detection over one path");
  add_common(sense, args);
  sense->add_option("--path", path_dir, "dataset path directory (env_XXX/path_YYY)")->required();
  sense->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  bs_config* cfg = make_config(args);
  if (!cfg) return 1;

  if (generate->parsed())
    return finish(cfg, bs_generate(cfg, mode.c_str(), out_dir.c_str()),
                  ("wrote dataset to " + out_dir).c_str());
  if (pretrain->parsed())
    return finish(cfg, bs_pretrain(cfg, dataset_dir.c_str(), out_dir.c_str()),
                  ("wrote model and report to " + out_dir).c_str());
  if (finetune->parsed())
    return finish(cfg,
                  bs_finetune(cfg, model_dir.c_str(), dataset_dir.c_str(), out_dir.c_str()),
                  ("wrote transfer report to " + out_dir).c_str());
  if (evaluate->parsed())
    return finish(cfg, bs_evaluate(cfg, model_dir.c_str(), dataset_dir.c_str(), out_dir.c_str()),
                  ("wrote metrics to " + out_dir).c_str());
  if (sense->parsed())
    return finish(cfg, bs_sense(cfg, path_dir.c_str(), out_dir.c_str()),
                  ("wrote dynamic maps and report to " + out_dir).c_str());

  bs_config_destroy(cfg);
  return 1;
}
