// prbnet command line: detect / profile / prompt-classes
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "prbnet/config.hpp"
#include "prbnet/detect.hpp"
#include "prbnet/graph.hpp"
#include "prbnet/profiler.hpp"
#include "prbnet/text.hpp"

namespace {

std::pair<int, int> parse_input_size(const std::string& s) {
    auto x = s.find('x');
    if (x == std::string::npos) throw prbnet::ArgumentError("input size must look like HxW");
    int h = std::stoi(s.substr(0, x));
    int w = std::stoi(s.substr(x + 1));
    return {h, w};
}

int run_detect_cmd(const std::string& image, const std::string& prompt, const std::string& config,
                   const std::string& weights, uint64_t seed, bool have_seed,
                   const std::string& vocab_path, const std::string& embeddings_path, double conf,
                   double iou_thr, double tau, bool no_prompt, bool pad, const std::string& out) {
    prbnet::PipelineConfig cfg = prbnet::load_config(config);
    if (conf >= 0) cfg.head.conf_threshold = static_cast<float>(conf);
    if (iou_thr >= 0) cfg.head.iou_threshold = static_cast<float>(iou_thr);
    if (tau >= 0) cfg.text.tau = static_cast<float>(tau);
    prbnet::validate_config(cfg);

    prbnet::WeightContainer wc = !weights.empty()
                                     ? prbnet::load_weights(weights, cfg)
                                     : prbnet::seed_weights(cfg, have_seed ? seed : cfg.seed);

    prbnet::StopWords stop = prbnet::StopWords::load(cfg.text.stopword_file);
    prbnet::Lemmatizer lm = prbnet::Lemmatizer::load(cfg.text.exception_file);
    prbnet::EmbeddingTable table = prbnet::EmbeddingTable::load(embeddings_path);
    prbnet::CategoryVocab vocab = prbnet::CategoryVocab::load(vocab_path);

    prbnet::DetectOptions opt;
    opt.image_path = image;
    opt.prompt = prompt;
    opt.no_prompt = no_prompt;
    opt.pad = pad;
    prbnet::FilteredResult result =
        prbnet::run_detect(opt, cfg, wc, stop, lm, table, vocab, out);
    std::cerr << result.detections.size() << " detection(s) kept, " << result.dropped_count
              << " dropped -> " << out << "\n";
    return 0;
}

int run_profile_cmd(const std::string& config, const std::string& input_size,
                    const std::string& format) {
    prbnet::PipelineConfig cfg = prbnet::load_config(config);
    auto [h, w] = parse_input_size(input_size);
    prbnet::CostReport params = prbnet::count_params(cfg);
    prbnet::CostReport flops = prbnet::count_flops(cfg, h, w);
    if (format == "json") {
        nlohmann::json breakdown = nlohmann::json::object();
        for (const auto& [name, p] : params.breakdown)
            breakdown[name] = {{"params", p}, {"flops", flops.breakdown.count(name) ? flops.breakdown.at(name) : 0}};
        for (const auto& [name, f] : flops.breakdown)
            if (!breakdown.contains(name)) breakdown[name] = {{"params", 0}, {"flops", f}};
        nlohmann::json out = {{"convention", "flops = 2 x multiply-accumulates"},
                              {"input_size", input_size},
                              {"parameter_count", params.total},
                              {"flops", flops.total},
                              {"breakdown", breakdown}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::printf("# flops = 2 x multiply-accumulates, input %s\n", input_size.c_str());
        std::printf("%-44s %14s %16s\n", "node", "params", "flops");
        for (const auto& [name, f] : flops.breakdown) {
            long long p = params.breakdown.count(name) ? params.breakdown.at(name) : 0;
            std::printf("%-44s %14lld %16lld\n", name.c_str(), p, f);
        }
        std::printf("%-44s %14lld %16lld\n", "TOTAL", params.total, flops.total);
    }
    return 0;
}

int run_prompt_classes_cmd(const std::string& prompt, const std::string& vocab_path,
                           const std::string& embeddings_path, double tau,
                           const std::string& stopword_file, const std::string& exception_file) {
    prbnet::StopWords stop = prbnet::StopWords::load(stopword_file);
    prbnet::Lemmatizer lm = prbnet::Lemmatizer::load(exception_file);
    prbnet::EmbeddingTable table = prbnet::EmbeddingTable::load(embeddings_path);
    prbnet::CategoryVocab vocab = prbnet::CategoryVocab::load(vocab_path);
    prbnet::PromptClassSet p_i = prbnet::prompt_to_classes(prompt, stop, lm, table, vocab, tau);
    nlohmann::json classes = nlohmann::json::array();
    for (int id : p_i.class_ids) {
        nlohmann::json prov = nlohmann::json::array();
        for (const auto& [lemma, score] : p_i.provenance.at(id))
            prov.push_back({{"lemma", lemma}, {"score", score}});
        classes.push_back(
            {{"class_id", id}, {"name", vocab.classes[id].name}, {"provenance", prov}});
    }
    nlohmann::json out = {{"prompt", prompt}, {"tau", tau}, {"classes", classes}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic-guided cross-modal detection pipeline"};
    app.require_subcommand(1);

    // detect
    auto* detect = app.add_subcommand("detect", "run the full pipeline on one image");
    std::string image, prompt, config, weights, vocab, embeddings, out;
    double conf = -1, iou_thr = -1, tau = -1;
    uint64_t seed = 0;
    bool no_prompt = false, pad = false;
    detect->add_option("--image", image, "input image (binary PPM)")->required();
    detect->add_option("--prompt", prompt, "natural-language prompt");
    detect->add_option("--config", config, "pipeline config (JSON)")->required();
    detect->add_option("--weights", weights, "PRBW weight file");
    auto* seed_opt = detect->add_option("--seed", seed, "seeded weight init (overrides config seed)");
    detect->add_option("--vocab", vocab, "category vocabulary file")->required();
    detect->add_option("--embeddings", embeddings, "embedding table file")->required();
    detect->add_option("--conf", conf, "confidence threshold override");
    detect->add_option("--iou", iou_thr, "NMS IoU threshold override");
    detect->add_option("--tau", tau, "prompt similarity threshold override");
    detect->add_flag("--no-prompt", no_prompt, "bypass semantic filtering");
    detect->add_flag("--pad", pad, "zero-pad image dims up to a multiple of 32");
    detect->add_option("--out", out, "output JSON path")->required();

    // profile
    auto* profile = app.add_subcommand("profile", "analytic parameter/FLOP report");
    std::string p_config, input_size = "64x64", format = "table";
    profile->add_option("--config", p_config, "pipeline config (JSON)")->required();
    profile->add_option("--input-size", input_size, "input size HxW (default 64x64)");
    profile->add_option("--format", format, "json|table")
        ->check(CLI::IsMember({"json", "table"}));

    // prompt-classes
    auto* pc = app.add_subcommand("prompt-classes", "map a prompt to category ids");
    std::string pc_prompt, pc_vocab, pc_embeddings;
    double pc_tau = 0.5;
    std::string pc_stop = "data/stopwords.txt", pc_exc = "data/lemma_exceptions.txt";
    pc->add_option("--prompt", pc_prompt, "natural-language prompt")->required();
    pc->add_option("--vocab", pc_vocab, "category vocabulary file")->required();
    pc->add_option("--embeddings", pc_embeddings, "embedding table file")->required();
    pc->add_option("--tau", pc_tau, "similarity threshold (default 0.5)");
    pc->add_option("--stopwords", pc_stop, "stop-word list file");
    pc->add_option("--exceptions", pc_exc, "lemma exception table file");

    try {
        app.parse(argc, argv);
        if (detect->parsed())
            return run_detect_cmd(image, prompt, config, weights, seed, seed_opt->count() > 0,
                                  vocab, embeddings, conf, iou_thr, tau, no_prompt, pad, out);
        if (profile->parsed()) return run_profile_cmd(p_config, input_size, format);
        if (pc->parsed())
            return run_prompt_classes_cmd(pc_prompt, pc_vocab, pc_embeddings, pc_tau, pc_stop, pc_exc);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1; // --help exits 0, usage errors exit 1
    } catch (const prbnet::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const prbnet::WeightError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const prbnet::IoError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 1;
}
