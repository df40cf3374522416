#pragma once

#include <vector>

#include "tokattr/model/bundle.hpp"
#include "tokattr/pipeline/attribution_io.hpp"
#include "tokattr/pipeline/records.hpp"

namespace tokattr::pipeline {

// One teacher-forced pass over the record, then a 7-source attribution of
// every response token.
AttributedResponse analyze_record(const model::ModelBundle& model, const AnalysisRecord& record,
                                  TemplateRoute default_route = TemplateRoute::query);

// Output order is input order for any `jobs`.
std::vector<AttributedResponse> analyze_records(const model::ModelBundle& model,
                                                const std::vector<AnalysisRecord>& records,
                                                TemplateRoute default_route = TemplateRoute::query,
                                                std::size_t jobs = 1);

}  // namespace tokattr::pipeline
