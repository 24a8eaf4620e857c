// unitok: train subword tokenizers, tokenize corpora deterministically,
// with dropout, or with uniform lattice sampling, and analyze the induced
// tokenization distributions.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.
// Every flag can also be set through the environment with the UNITOK_
// prefix (e.g. UNITOK_SEED=7 unitok tokenize ...).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unitok/analysis.hpp"
#include "unitok/bpe.hpp"
#include "unitok/corpus.hpp"
#include "unitok/error.hpp"
#include "unitok/lattice.hpp"
#include "unitok/maxmatch.hpp"
#include "unitok/regularizer.hpp"
#include "unitok/verify.hpp"

namespace {

using namespace unitok;

std::string env_name(const std::string& flag) {
  std::string name = "UNITOK_";
  for (char c : flag) name += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return name;
}

CLI::Option* with_env(CLI::Option* opt, const std::string& flag) {
  return opt->envname(env_name(flag));
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  return out;
}

struct ModelArgs {
  std::string model_prefix;
  std::string vocab_file;
  std::string scheme = "bpe";
  std::string marker = "#";

  void attach(CLI::App* cmd, bool scheme_flag = true) {
    with_env(cmd->add_option("--model", model_prefix,
                             "model prefix; loads <prefix>.merges and <prefix>.vocab"),
             "model");
    with_env(cmd->add_option("--vocab", vocab_file,
                             "marked subword vocabulary file (maxmatch scheme)"),
             "vocab");
    if (scheme_flag)
      with_env(cmd->add_option("--scheme", scheme, "tokenization scheme")
                   ->check(CLI::IsMember({"bpe", "maxmatch"})),
               "scheme");
    with_env(cmd->add_option("--marker", marker, "word-internal marker prefix"),
             "marker");
  }

  BpeModel load_bpe() const {
    if (model_prefix.empty())
      throw ConfigError("--model is required for the bpe scheme");
    auto merges = open_input(model_prefix + ".merges");
    auto vocab = open_input(model_prefix + ".vocab");
    return load_bpe_model(merges, vocab);
  }

  SubwordVocab load_marked_vocab() const {
    const std::u32string marker32 = decode_utf8(marker);
    if (!vocab_file.empty()) {
      auto in = open_input(vocab_file);
      return load_subword_vocab(in, marker32);
    }
    if (!model_prefix.empty()) return derive_marked_vocab(load_bpe(), marker32);
    throw ConfigError("either --vocab or --model is required");
  }
};

Scheme parse_scheme(const std::string& s) {
  return s == "bpe" ? Scheme::kBpe : Scheme::kMaxMatch;
}

StochasticTokenizer make_tokenizer(const ModelArgs& model_args, const std::string& mode,
                                   double rate, std::uint64_t seed,
                                   const std::string& scope, const std::string& side) {
  StochasticTokenizerConfig cfg;
  cfg.scheme = parse_scheme(model_args.scheme);
  cfg.mode = mode == "uniform" ? Mode::kUniform : Mode::kDropout;
  cfg.rate = mode == "deterministic" ? 0.0 : rate;
  cfg.seed = seed;
  cfg.scope = scope == "source" ? Scope::kSource
                                : (scope == "target" ? Scope::kTarget : Scope::kBoth);
  cfg.side = side == "target" ? Side::kTarget : Side::kSource;
  cfg.validate();
  if (cfg.scheme == Scheme::kBpe) return StochasticTokenizer(model_args.load_bpe(), cfg);
  return StochasticTokenizer(model_args.load_marked_vocab(), cfg);
}

// --- train ----------------------------------------------------------------

struct TrainArgs {
  std::string input;
  std::string output;
  std::uint64_t merges = 0;
  std::string eow;
};

int cmd_train(const TrainArgs& args) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (!args.input.empty() && args.input != "-") {
    file = open_input(args.input);
    in = &file;
  }
  const WordCounts counts = ingest(*in, decode_utf8(args.eow));
  const BpeModel model = train_bpe(counts, args.merges);

  auto merges_out = open_output(args.output + ".merges");
  save_merges(model, merges_out);
  auto vocab_out = open_output(args.output + ".vocab");
  save_bpe_vocab(model, vocab_out);

  std::cout << "vocab " << model.vocab().size() << " merges " << model.merges().size()
            << '\n';
  return 0;
}

// --- tokenize ---------------------------------------------------------------

struct TokenizeArgs {
  std::string input = "-";
  std::string output = "-";
  ModelArgs model;
  std::string mode = "deterministic";
  double rate = 0.0;
  std::uint64_t seed = kDefaultSeed;
  bool random_seed = false;
  int workers = 1;
  std::string scope = "both";
  std::string side = "source";
  std::string eow;
};

int cmd_tokenize(const TokenizeArgs& args) {
  const std::uint64_t seed = args.random_seed ? std::random_device{}() : args.seed;
  const StochasticTokenizer tokenizer =
      make_tokenizer(args.model, args.mode, args.rate, seed, args.scope, args.side);

  std::ifstream infile;
  std::istream* in = &std::cin;
  if (args.input != "-") {
    infile = open_input(args.input);
    in = &infile;
  }
  std::ofstream outfile;
  std::ostream* out = &std::cout;
  if (args.output != "-") {
    outfile = open_output(args.output);
    out = &outfile;
  }

  CorpusStats stats;
  if (args.eow.empty()) {
    stats = tokenizer.tokenize_corpus(*in, *out, args.workers);
  } else {
    // End-of-word suffix: append per word before encoding.
    const std::string suffix = args.eow;
    std::ostringstream buffered;
    std::string line;
    while (std::getline(*in, line)) {
      const auto words = split_whitespace(decode_utf8(line));
      std::string rebuilt;
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) rebuilt += ' ';
        rebuilt += encode_utf8(words[i]) + suffix;
      }
      buffered << rebuilt << '\n';
    }
    std::istringstream replay(buffered.str());
    stats = tokenizer.tokenize_corpus(replay, *out, args.workers);
  }

  std::cerr << "lines " << stats.lines << " words " << stats.words << " tokens "
            << stats.tokens << " types " << stats.type_count() << " uniform-sampled "
            << stats.uniform_sampled << " dropout-encoded " << stats.dropout_encoded
            << " canonical " << stats.canonical_words << '\n';
  for (const auto& e : stats.errors)
    std::cerr << "line " << e.line << ": word '" << e.word << "': " << e.message << '\n';
  return stats.errors.empty() ? 0 : 1;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string word;
  std::string wordlist;
  ModelArgs model;
  std::string mode = "dropout";
  double rate = 0.1;
  bool exact = false;
  std::uint64_t samples = 100'000;
  std::uint64_t seed = kDefaultSeed;
  std::string report = "-";
  std::string format = "csv";
  std::string curve_grid;
  std::uint32_t curve_repeats = 50;
  std::string curve_report;
};

std::vector<std::uint64_t> parse_grid(const std::string& csv) {
  std::vector<std::uint64_t> grid;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) grid.push_back(std::stoull(item));
  return grid;
}

int cmd_analyze(const AnalyzeArgs& args) {
  std::vector<std::u32string> words;
  if (!args.word.empty()) words.push_back(decode_utf8(args.word));
  if (!args.wordlist.empty()) {
    auto in = open_input(args.wordlist);
    std::string line;
    while (std::getline(in, line))
      for (auto& w : split_whitespace(decode_utf8(line))) words.push_back(w);
  }

  const Scheme scheme = parse_scheme(args.model.scheme);
  std::optional<BpeModel> bpe;
  std::optional<SubwordVocab> vocab;
  if (scheme == Scheme::kBpe) {
    bpe = args.model.load_bpe();
    if (args.mode == "uniform") vocab = derive_marked_vocab(*bpe);
  } else {
    vocab = args.model.load_marked_vocab();
  }
  const std::u32string render_marker =
      scheme == Scheme::kMaxMatch ? vocab->marker() : std::u32string();

  std::ofstream report_file;
  std::ostream* report_out = &std::cout;
  if (args.report != "-") {
    report_file = open_output(args.report);
    report_out = &report_file;
  }
  const char delimiter = args.format == "tsv" ? '\t' : ',';

  // Empty word set still emits the header so downstream readers see the
  // schema.
  if (words.empty()) {
    *report_out << "# unitok distribution report " << kReportFormatVersion << '\n'
                << "tokenization" << delimiter << "probability" << delimiter
                << "is_canonical\n";
    return 0;
  }

  std::vector<std::string> failures;
  for (const auto& word : words) {
    try {
      const Tokenization canonical = scheme == Scheme::kBpe
                                         ? bpe_encode_deterministic(word, *bpe)
                                         : maxmatch_encode_deterministic(word, *vocab);
      DistributionReport report;
      std::optional<TokenizationLattice> lattice;
      std::vector<Tokenization> support;
      if (args.mode == "uniform") {
        lattice = build_lattice(word, *vocab);
        if (lattice->path_count() <= kReportSupportLimit)
          support = enumerate_paths(lattice.value(), kReportSupportLimit);
      }

      if (args.exact && args.mode == "dropout") {
        report = scheme == Scheme::kBpe ? exact_bpe_dropout_dist(word, *bpe, args.rate)
                                        : exact_maxmatch_dropout_dist(word, *vocab, args.rate);
      } else if (args.exact) {
        // Exact mixture: rate/T per path plus (1-rate) on the canonical.
        if (support.empty())
          throw LimitError("path count above the exact-report limit",
                           lattice->path_count().str());
        std::map<Tokenization, double> probs;
        const double t = static_cast<double>(lattice->path_count());
        for (const auto& path : support) probs[path] = args.rate / t;
        probs[canonical] += 1.0 - args.rate;
        report = make_exact_report(word, probs, canonical);
      } else {
        TokenizerClosure sampler;
        if (args.mode == "dropout") {
          sampler = [&](Rng& rng) {
            return scheme == Scheme::kBpe ? bpe_encode(word, *bpe, args.rate, rng)
                                          : maxmatch_encode(word, *vocab, args.rate, rng);
          };
        } else {
          sampler = [&](Rng& rng) -> Tokenization {
            if (unit_double(rng) < args.rate) return exact_uniform_sample(*lattice, rng);
            return canonical;
          };
        }
        report = empirical_distribution(word, sampler, args.samples, args.seed, canonical,
                                        support.empty() ? nullptr : &support);
      }
      write_report_csv(*report_out, report, render_marker, delimiter);

      if (!args.curve_grid.empty()) {
        TokenizerClosure sampler;
        if (args.mode == "dropout") {
          sampler = [&](Rng& rng) {
            return scheme == Scheme::kBpe ? bpe_encode(word, *bpe, args.rate, rng)
                                          : maxmatch_encode(word, *vocab, args.rate, rng);
          };
        } else {
          sampler = [&](Rng& rng) -> Tokenization {
            if (unit_double(rng) < args.rate) return exact_uniform_sample(*lattice, rng);
            return canonical;
          };
        }
        const auto curve = unique_count_curve(sampler, parse_grid(args.curve_grid),
                                              args.curve_repeats, args.seed);
        std::ofstream curve_file;
        std::ostream* curve_out = report_out;
        if (!args.curve_report.empty()) {
          curve_file = open_output(args.curve_report);
          curve_out = &curve_file;
        }
        *curve_out << "samples" << delimiter << "mean_unique\n";
        char buf[64];
        for (const auto& [n, mean] : curve) {
          std::snprintf(buf, sizeof buf, "%.17g", mean);
          *curve_out << n << delimiter << buf << '\n';
        }
      }
    } catch (const Error& e) {
      failures.push_back(encode_utf8(word) + ": " + e.what());
    }
  }
  for (const auto& f : failures) std::cerr << f << '\n';
  return failures.empty() ? 0 : 1;
}

// --- efficiency -------------------------------------------------------------

struct EfficiencyArgs {
  std::string input = "-";
  double alpha = 1.0;
  std::uint64_t vocab_size = 0;
  ModelArgs model;
};

int cmd_efficiency(const EfficiencyArgs& args) {
  std::ifstream infile;
  std::istream* in = &std::cin;
  if (args.input != "-") {
    infile = open_input(args.input);
    in = &infile;
  }
  std::unordered_map<std::string, std::uint64_t> counts;
  std::string line;
  while (std::getline(*in, line))
    for (const auto& token : split_whitespace(decode_utf8(line)))
      counts[encode_utf8(token)] += 1;

  std::uint64_t vocab_size = args.vocab_size;
  if (vocab_size == 0) {
    if (!args.model.vocab_file.empty()) {
      const SubwordVocab vocab = args.model.load_marked_vocab();
      vocab_size = vocab.initial().size() + vocab.internal().size();
    } else if (!args.model.model_prefix.empty()) {
      vocab_size = args.model.load_bpe().vocab().size();
    } else {
      throw ConfigError("--vocab-size, --model, or --vocab is required");
    }
  }
  const EfficiencyReport report = renyi_efficiency(counts, vocab_size, args.alpha);
  std::cout << "alpha " << report.alpha << " vocab_size " << report.vocab_size
            << " entropy_bits " << report.entropy_bits << " efficiency "
            << report.efficiency << '\n';
  return 0;
}

// --- lattice ----------------------------------------------------------------

struct LatticeArgs {
  std::string word;
  ModelArgs model;
  std::string output = "-";
  std::uint64_t samples = 0;
  std::string sampler = "exact";
  std::uint64_t seed = kDefaultSeed;
};

int cmd_lattice(const LatticeArgs& args) {
  if (args.word.empty()) throw ConfigError("--word is required");
  const SubwordVocab vocab = args.model.load_marked_vocab();
  const TokenizationLattice lattice = build_lattice(decode_utf8(args.word), vocab);

  std::ofstream outfile;
  std::ostream* out = &std::cout;
  if (args.output != "-") {
    outfile = open_output(args.output);
    out = &outfile;
  }
  *out << dump_lattice(lattice);

  if (args.samples > 0) {
    Rng rng(args.seed);
    const std::u32string marker =
        parse_scheme(args.model.scheme) == Scheme::kMaxMatch ? vocab.marker()
                                                             : std::u32string();
    for (std::uint64_t i = 0; i < args.samples; ++i) {
      Tokenization t;
      if (args.sampler == "biased")
        t = biased_sample(lattice, rng).tokenization;
      else if (args.sampler == "unbiased")
        t = unbiased_sample(lattice, rng).tokenization;
      else
        t = exact_uniform_sample(lattice, rng);
      *out << render(t, marker) << '\n';
    }
  }
  return 0;
}

// --- verify -----------------------------------------------------------------

int cmd_verify(std::uint64_t seed) {
  const auto results = run_builtin_checks(seed);
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail
              << ")\n";
    if (!r.pass) {
      ++failed;
      std::cerr << "check failed: " << r.name << '\n';
    }
  }
  std::cout << (failed == 0 ? "all checks passed" : "checks failed") << " (" << results.size()
            << " checks)\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subword tokenization with dropout and uniform lattice sampling"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "learn a BPE model from a corpus");
  with_env(train->add_option("--input,-i", train_args.input, "corpus file ('-' = stdin)"),
           "input");
  with_env(train->add_option("--merges,-m", train_args.merges, "number of merges")
               ->required(),
           "merges");
  with_env(train->add_option("--output,-o", train_args.output,
                             "model prefix for .merges/.vocab files")
               ->required(),
           "output");
  with_env(train->add_option("--eow", train_args.eow, "end-of-word suffix (off by default)"),
           "eow");

  TokenizeArgs tok_args;
  auto* tokenize = app.add_subcommand("tokenize", "tokenize a line-oriented corpus");
  with_env(tokenize->add_option("--input,-i", tok_args.input, "input file ('-' = stdin)"),
           "input");
  with_env(tokenize->add_option("--output,-o", tok_args.output, "output file ('-' = stdout)"),
           "output");
  tok_args.model.attach(tokenize);
  with_env(tokenize->add_option("--mode", tok_args.mode, "tokenization mode")
               ->check(CLI::IsMember({"deterministic", "dropout", "uniform"})),
           "mode");
  with_env(tokenize->add_option("--rate", tok_args.rate,
                                "dropout probability or uniform-sampling rate"),
           "rate");
  with_env(tokenize->add_option("--seed", tok_args.seed, "master seed (default 42)"),
           "seed");
  tokenize->add_flag("--random-seed", tok_args.random_seed,
                     "seed from system entropy instead of --seed");
  with_env(tokenize->add_option("--workers", tok_args.workers, "worker threads"),
           "workers");
  with_env(tokenize->add_option("--scope", tok_args.scope,
                                "which sides receive stochastic tokenization")
               ->check(CLI::IsMember({"source", "target", "both"})),
           "scope");
  with_env(tokenize->add_option("--side", tok_args.side, "which side this stream is")
               ->check(CLI::IsMember({"source", "target"})),
           "side");
  with_env(tokenize->add_option("--eow", tok_args.eow, "end-of-word suffix"), "eow");

  AnalyzeArgs an_args;
  auto* analyze = app.add_subcommand("analyze", "distribution reports for words");
  with_env(analyze->add_option("--word", an_args.word, "single word"), "word");
  with_env(analyze->add_option("--wordlist", an_args.wordlist, "file of words"),
           "wordlist");
  an_args.model.attach(analyze);
  with_env(analyze->add_option("--mode", an_args.mode, "distribution to analyze")
               ->check(CLI::IsMember({"dropout", "uniform"})),
           "mode");
  with_env(analyze->add_option("--rate", an_args.rate, "dropout probability or rate"),
           "rate");
  analyze->add_flag("--exact", an_args.exact, "exact oracle instead of sampling");
  with_env(analyze->add_option("--samples,-n", an_args.samples, "empirical sample count"),
           "samples");
  with_env(analyze->add_option("--seed", an_args.seed, "sampling seed"), "seed");
  with_env(analyze->add_option("--report", an_args.report, "report path ('-' = stdout)"),
           "report");
  with_env(analyze->add_option("--format", an_args.format, "csv or tsv")
               ->check(CLI::IsMember({"csv", "tsv"})),
           "format");
  with_env(analyze->add_option("--curve-grid", an_args.curve_grid,
                               "comma-separated sample counts for the unique-count curve"),
           "curve-grid");
  with_env(analyze->add_option("--curve-repeats", an_args.curve_repeats, "curve repeats"),
           "curve-repeats");
  with_env(analyze->add_option("--curve-report", an_args.curve_report, "curve CSV path"),
           "curve-report");

  EfficiencyArgs eff_args;
  auto* efficiency =
      app.add_subcommand("efficiency", "Rényi efficiency of a tokenized corpus");
  with_env(efficiency->add_option("--input,-i", eff_args.input,
                                  "tokenized text ('-' = stdin)"),
           "input");
  with_env(efficiency->add_option("--alpha", eff_args.alpha, "Rényi order (1 = Shannon)"),
           "alpha");
  with_env(efficiency->add_option("--vocab-size", eff_args.vocab_size,
                                  "vocabulary size (or derive via --model/--vocab)"),
           "vocab-size");
  eff_args.model.attach(efficiency, /*scheme_flag=*/false);

  LatticeArgs lat_args;
  auto* lattice = app.add_subcommand("lattice", "dump and sample a word's lattice");
  with_env(lattice->add_option("--word", lat_args.word, "word")->required(), "word");
  lat_args.model.attach(lattice);
  with_env(lattice->add_option("--output,-o", lat_args.output, "output ('-' = stdout)"),
           "output");
  with_env(lattice->add_option("--samples,-n", lat_args.samples,
                               "also emit this many sampled tokenizations"),
           "samples");
  with_env(lattice->add_option("--sampler", lat_args.sampler, "sampling algorithm")
               ->check(CLI::IsMember({"biased", "unbiased", "exact"})),
           "sampler");
  with_env(lattice->add_option("--seed", lat_args.seed, "sampling seed"), "seed");

  std::uint64_t verify_seed = kDefaultSeed;
  auto* verify = app.add_subcommand("verify", "run the built-in correctness checks");
  with_env(verify->add_option("--seed", verify_seed, "seed for the seeded checks"),
           "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (tokenize->parsed()) return cmd_tokenize(tok_args);
    if (analyze->parsed()) return cmd_analyze(an_args);
    if (efficiency->parsed()) return cmd_efficiency(eff_args);
    if (lattice->parsed()) return cmd_lattice(lat_args);
    if (verify->parsed()) return cmd_verify(verify_seed);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
