#pragma once

// Ten-document corpus shared by the pipeline tests.

#include <vector>

#include "hrag/hrag.hpp"

namespace testutil {

inline hrag::Gazetteer small_gazetteer() {
  return hrag::Gazetteer::from_json({{"ORG", {"NASSCOM", "Infosys", "Wipro", "Acme Corp"}},
                                     {"LOCATION", {"Hyderabad", "Pune", "Chennai"}}});
}

inline std::vector<hrag::Document> small_corpus() {
  using hrag::DocKind;
  using hrag::make_document;
  std::vector<hrag::Document> d;
  d.push_back(make_document("policies/leave.md", "leave.md", DocKind::text,
                            "Annual leave. Infosys employees in Hyderabad receive 24 days of annual leave per year. "
                            "Unused leave up to 10 days carries over. Sick leave is 12 days per year. "
                            "Leave requests are approved by the reporting manager.",
                            {{"document_type", "policy"}, {"department", "hr"}}));
  d.push_back(make_document("policies/leave_wipro.md", "leave_wipro.md", DocKind::text,
                            "Wipro employees receive 21 days of annual leave per year. Carry over is capped at 5 days.",
                            {{"document_type", "policy"}, {"department", "hr"}}));
  d.push_back(make_document("policies/travel.md", "travel.md", DocKind::text,
                            "Business travel needs manager approval. Claims are filed within 30 days of return. "
                            "Hotels in Pune are capped at 6000 rupees per night.",
                            {{"document_type", "policy"}, {"department", "finance"}}));
  d.push_back(make_document("policies/security.md", "security.md", DocKind::text,
                            "Passwords have at least 14 characters and rotate every 180 days. "
                            "The NASSCOM audit panel reviews the security standard every year.",
                            {{"document_type", "standard"}, {"department", "it"}}));
  d.push_back(make_document("policies/remote.md", "remote.md", DocKind::text,
                            "Remote work is allowed two days per week. Acme Corp contractors work on site in Chennai.",
                            {{"document_type", "policy"}, {"department", "hr"}}));
  d.push_back(make_document("policies/expenses.md", "expenses.md", DocKind::text,
                            "Expense reimbursement requires receipts. Meals are reimbursed up to 800 rupees per day.",
                            {{"document_type", "policy"}, {"department", "finance"}}));
  d.push_back(make_document("policies/onboarding.md", "onboarding.md", DocKind::text,
                            "New joiners complete onboarding in their first week. Laptops are issued on day one.",
                            {{"document_type", "guide"}, {"department", "it"}}));
  d.push_back(make_document("notes/holidays.md", "holidays.md", DocKind::text,
                            "The Hyderabad office observes 12 public holidays. The Pune office observes 11.",
                            {{"document_type", "notice"}, {"department", "hr"}}));
  d.push_back(make_document("hr/bands.csv", "bands.csv", DocKind::table,
                            "grade,title,min_salary,max_salary\nG1,Associate,600000,900000\nG2,Engineer,900000,1400000\n"
                            "G3,Senior Engineer,1400000,2200000\n",
                            {{"document_type", "compensation"}, {"department", "hr"}}));
  d.push_back(make_document("hr/offices.csv", "offices.csv", DocKind::table,
                            "office,city,headcount\nHYD-1,Hyderabad,850\nPUN-1,Pune,400\nCHN-1,Chennai,220\n",
                            {{"document_type", "directory"}, {"department", "admin"}}));
  return d;
}

inline hrag::IndexBuildConfig small_build_config() {
  hrag::IndexBuildConfig cfg;
  cfg.gazetteer = small_gazetteer();
  return cfg;
}

inline hrag::IndexBundle small_index() { return hrag::build_index(small_corpus(), small_build_config()); }

}  // namespace testutil
