#ifndef REACFUSE_SYNTHDATA_HPP
#define REACFUSE_SYNTHDATA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reacfuse/chem.hpp"
#include "reacfuse/eln.hpp"

namespace reacfuse::synth {

struct GeneratorSpec {
  std::int64_t n_records = 20000;
  double unlabeled_fraction = 0.30;
  double labeled_pos_fraction = 0.75;
  double unlabeled_pos_fraction = 0.58;
  double near_empty_fraction = 0.002;
  double noise_rate = 0.05;  // label noise relative to the planted rule
  double text_noise = 0.03;  // cue contradicts ground truth
  double pd_fraction = 0.0125;
  std::uint64_t seed = 1;
};

// Hidden success function: a substrate-class x partner-class x catalyst-class
// compatibility pattern, flattened by noise_rate, with poison additives
// forcing the failure branch. Pure function of structured inputs.
struct PlantedRule {
  int n_substrate_classes = 6;
  int n_partner_classes = 5;
  int n_catalysts = 5;

  bool cell_success(int sub_class, int partner_class, int catalyst) const {
    return (sub_class + 2 * partner_class + catalyst) % 7 < 4;
  }
  double success_prob(int sub_class, int partner_class, int catalyst, bool poisoned,
                      double noise_rate) const {
    bool ok = !poisoned && cell_success(sub_class, partner_class, catalyst);
    return ok ? 1.0 - noise_rate : noise_rate;
  }
  int rule_id(int sub_class, int partner_class, int catalyst, bool poisoned) const {
    int base = (sub_class * n_partner_classes + partner_class) * n_catalysts + catalyst;
    return poisoned ? base + n_substrate_classes * n_partner_classes * n_catalysts : base;
  }
  std::string dump(double noise_rate) const;
};

// Substrate/partner templates, RSC names, and the graph surgery that couples
// them into products.
class MotifLibrary {
public:
  static const MotifLibrary& instance();

  int substrate_count() const;
  int partner_count() const;
  int substrate_class(int variant) const;
  int partner_class(int variant) const;
  const std::vector<int>& substrates_of_class(int cls) const;
  const std::vector<int>& partners_of_class(int cls) const;

  const std::vector<std::string>& catalysts() const { return catalysts_; }
  const std::vector<std::string>& solvents() const { return solvents_; }
  const std::vector<std::string>& bases() const { return bases_; }
  const std::vector<std::string>& poisons() const { return poisons_; }
  bool catalyst_is_pd(int catalyst) const { return catalyst < 3; }

  // reactants [substrate, partner], coupled single product
  chem::Reaction build_reaction(int substrate_variant, int partner_variant) const;

  std::vector<std::string> rsc_tokens() const;        // for the RSC dictionary
  chem::AtomVocab build_atom_vocab() const;           // every (element, charge) in play
  chem::RscVocab build_rsc_vocab() const;

  // Inverse lookup for audits: recover (sub_class, partner_class, catalyst,
  // poisoned) from a written reaction. Returns nullopt for foreign reactions.
  struct Classified {
    int substrate_class, partner_class, catalyst;
    bool poisoned;
  };
  std::optional<Classified> classify(const std::string& reaction_text) const;

private:
  MotifLibrary();

  std::vector<std::string> substrate_smiles_, partner_smiles_;
  std::vector<int> substrate_class_, partner_class_;
  std::vector<std::vector<int>> substrates_by_class_, partners_by_class_;
  std::vector<std::string> catalysts_, solvents_, bases_, poisons_;
};

std::vector<data::ElnRecord> generate(const GeneratorSpec& spec);

// Keyword/number audit of the outcome cue a procedure text carries.
// Test-facing: lets property suites measure text faithfulness without
// re-running the generator.
std::optional<int> detect_text_cue(const data::ElnRecord& rec);

}  // namespace reacfuse::synth

#endif
