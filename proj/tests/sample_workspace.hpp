#pragma once

// The crime/protest workspace built through the API rather than loaded.

#include "insightspec/workspace.hpp"

namespace sample {

inline insightspec::Schema crime_schema() {
  using insightspec::AttributeType;
  return {{"CrimeDate", AttributeType::temporal},
          {"Description", AttributeType::nominal},
          {"Inside/Outside", AttributeType::nominal},
          {"Premise", AttributeType::nominal}};
}

inline insightspec::Dataset crime_table() {
  return insightspec::load_table(
      "CrimeDate,Description,Inside/Outside,Premise\n"
      "04/27/2015,BURGLARY,I,ROW/TOWNHO\n"
      "04/25/2015,LARCENY,O,STREET\n"
      "04/27/2015,ROBBERY - STREET,O,STREET\n"
      "04/26/2015,BURGLARY,I,ROW/TOWNHO\n"
      "04/27/2015,LARCENY,O,PARKING LOT\n"
      "04/28/2015,ROBBERY - STREET,O,STREET\n"
      "04/25/2015,BURGLARY,I,APT/CONDO\n",
      "baltimoreCrime", crime_schema());
}

inline insightspec::Workspace build() {
  using namespace insightspec;
  Workspace w("baltimore");
  w.add_dataset("baltimoreCrime", "baltimore_crimes.csv", crime_schema());
  w.attach_dataset(crime_table());
  w.add_transformation("aggTransform",
                       {{"baltimoreCrime"},
                        {group_by({"CrimeDate"}), rollup({count("count")}), order_by({desc("count")}),
                         filter(rank() <= 2)}});
  RelationshipModel m;
  m.name = "predictCrimeType";
  m.kind = RelationshipKind::DecisionTreeClassification;
  m.inputs = {{"Inside/Outside", AttributeType::nominal}, {"Premise", AttributeType::nominal}};
  m.output = Attribute{"Description", AttributeType::nominal};
  w.add_model(m);

  w.create_concept("Crime");
  w.create_concept("Protest");
  Metadata meta;
  meta.attributes = {{"link", AttributeType::nominal}};
  meta.values = {{"link", Value::nominal("https://en.wikipedia.org/wiki/2015_Baltimore_protests")}};
  w.create_domain_node("2015BaltimoreProtests", "Protest", meta, {});

  w.create_analytic_node("peakCrimes", 1430438400000, "aggTransform", std::nullopt, true,
                         "top 3 days of reported crimes");
  w.create_analytic_node("crimeLocations", 1430438400000, std::nullopt, "predictCrimeType", false,
                         "location poor predictor of crime type");

  w.create_insight("johnsInsight", std::vector<DomainElement>{"2015BaltimoreProtests"},
                   std::vector<AnalyticElement>{"peakCrimes", "crimeLocations"},
                   "Peak Crime = Freddy Grey's Funeral. location not as relevant.");
  w.create_insight("protestsObjective", std::vector<DomainElement>{"2015BaltimoreProtests"},
                   Wildcard{}, "How did Freddy Gray's funeral impact Baltimore crime?");
  w.create_insight("aprilCrimeObjective", Wildcard{}, std::vector<AnalyticElement>{"peakCrimes"},
                   "What happened on April 27, 2015 that may have led to more crime?");
  w.create_task("protestsTask", "protestsObjective", {"johnsInsight"});
  return w;
}

}  // namespace sample
