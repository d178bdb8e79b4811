#include "aif/llm.hpp"

namespace aif::llm {

namespace {

const char* kDecomposeBody = R"__(# IMPORTANT - DO NOT STOP UNTIL EVERY SINGLE INFORMATION IS EXTRACTED

You are a grounding fact extractor and relevance score assigner. Your job is to:
1. Extract every informational statement from the provided grounding data, regardless of whether it's verifiable or not.
 - Extract every sentence in the grounding data as a factual statement, including preference and subjective information.
   - Each statement should be self-contained and understandable without additional context.
   - Replace all pronouns (he, she, it, they, his, her, its, their, etc.) and demonstrative references (this, that, these, those, the [noun]) with their corresponding subject entities so that each fact can stand alone without context (e.g., replace "the film" with the actual film name).
   - Preserve special terminology, links, and phrases in the extracted facts.
   - Individual words or phrases (such as meaningful titles or section names) must be understood within the context of the entire grounding data and form a coherent statement. Non-meaningful words or phrases should not be extracted as statements.
   - Do Not use any information from the user query when extracting facts.
   **Granularity Rules (apply in order):**
   a) **Keep together as single statements:**
      - Facts with causal relationships (e.g., "Because of X, Y occurred")
      - Facts with temporal relationships (e.g., "When X began, Y happened")
      - Facts with conditional relationships (e.g., "If X, then Y")
      - Multiple items that share the same relationship to a subject (e.g., "John played in Musical A, Musical B, and Musical C")
   b) **Separate into distinct statements:**
      - Items that have different relationships to a subject (e.g., "John played in Musical A" and "John directed Musical B" should be two statements)
      - Items that have different contexts or timeframes
      - Facts that can stand independently without losing meaning
   c) **When in doubt:**
      - Prioritize self-containment: the statement must make complete sense on its own
      - Prioritize preserving logical relationships: don't break apart facts that depend on each other for meaning


2. For each factual statement, assign a relevance score to the user query using the following Likert scale:
   - 1: Not relevant at all (the fact has no connection to the user query)
   - 2: Slightly relevant (the fact is tangentially related but not useful for answering the query)
   - 3: Moderately relevant (the fact is somewhat related and may provide partial context)
   - 4: Very relevant (the fact directly supports or answers part of the query)
   - 5: Extremely relevant (the fact is essential and directly answers the query)

### Output Format
[
    {
        Fact: Natural Language Fact from grounding data,
        Relevance: 3
    }
]
Output the Json array only, without any additional text or explanation.

### Examples

#### Example 1
User Query: Why is my video streaming account suspended?
Grounding Data: The StreamView account is suspended due to a failed payment transaction. Access is restored immediately once a valid card is added. Account suspension does not cancel the billing cycle. You can update payment details in the settings tab. Pending charges are re-attempted every 48 hours. Support cannot manually override suspension without payment. It is recommended to check with your bank for blocks.
Output:
[
  { "Fact": "The StreamView account is suspended due to a failed payment transaction.", "Relevance": 5 },
  { "Fact": "Access is restored immediately once a valid card is added.", "Relevance": 5 },
  { "Fact": "Account suspension does not cancel the billing cycle.", "Relevance": 4 },
  { "Fact": "You can update payment details in the settings tab.", "Relevance": 4 },
  { "Fact": "Pending charges are re-attempted every 48 hours.", "Relevance": 3 },
  { "Fact": "Support cannot manually override suspension without payment.", "Relevance": 3 },
  { "Fact": "It is recommended to check with your bank for blocks.", "Relevance": 2 }
]

#### Example 2
User Query: What features are included in the new Smart Home Hub?
Grounding Data: The Smart Home Hub features voice control and energy monitoring. The launch announcement mentions compatibility with third-party bulbs. A mobile app is required for setup. The Hub connects via Wi-Fi and Bluetooth. Security cameras and door locks can be integrated. Customer reviews highlight ease of use. The device comes in white and black colors. Standard warranty covers one year.
Output:
[
  { "Fact": "The Smart Home Hub features voice control and energy monitoring.", "Relevance": 5 },
  { "Fact": "The Smart Home Hub connects via Wi-Fi and Bluetooth.", "Relevance": 5 },
  { "Fact": "A mobile app is required for setup.", "Relevance": 4 },
  { "Fact": "The launch announcement mentions compatibility with third-party bulbs.", "Relevance": 4 },
  { "Fact": "Security cameras and door locks can be integrated.", "Relevance": 4 },
  { "Fact": "Customer reviews highlight ease of use.", "Relevance": 3 },
  { "Fact": "The device comes in white and black colors.", "Relevance": 2 },
  { "Fact": "Standard warranty covers one year.", "Relevance": 2 }
]

#### Example 3
User Query: Tell me about the Mars Perseverance Rover
Grounding Data: Perseverance is a Mars rover developed by NASA. It landed on Mars in February 2021. Its mission is to seek signs of ancient life. It carries a small helicopter named Ingenuity. The rover is about the size of a car.
Output:
[
  { "Fact": "Perseverance is a Mars rover developed by NASA.", "Relevance": 5 },
  { "Fact": "Perseverance landed on Mars in February 2021.", "Relevance": 4 },
  { "Fact": "Perseverance's mission is to seek signs of ancient life.", "Relevance": 5 },
  { "Fact": "Perseverance carries a small helicopter named Ingenuity.", "Relevance": 4 },
  { "Fact": "The rover is about the size of a car.", "Relevance": 3 }
]

#### Example 4
User Query: How do I recover a deleted file?
Grounding Data: The system has a recycle bin that holds files for 30 days. You can restore files by right-clicking them in the bin. Permanently deleted files cannot be recovered without specialized software. Cloud backups may contain older versions. The interface supports custom themes.
Output:
[
  { "Fact": "The system has a recycle bin that holds files for 30 days.", "Relevance": 5 },
  { "Fact": "You can restore files by right-clicking them in the bin.", "Relevance": 5 },
  { "Fact": "Permanently deleted files cannot be recovered without specialized software.", "Relevance": 4 },
  { "Fact": "Cloud backups may contain older versions.", "Relevance": 4 },
  { "Fact": "The interface supports custom themes.", "Relevance": 1 }
]

### User Query
{user_query}

### Grounding Data
{grounding_data})__";

const char* kAssignBody = R"__(You are a fact extractor and fact assignment checker for LLM evaluation. Given a **response** to a **query** and a list of **grounding facts**, your task is to:
1. Break down the **response** into discrete fact/claim statements.
  - Extract and output only the main findings and results, excluding any initial planning, task breakdown, assumptions, or next steps.
  - Each statement should be self-contained and understandable without additional context.
  - Replace all pronouns (he, she, it, they, his, her, its, their, etc.) and demonstrative references (this, that, these, those, the [noun]) with their corresponding subject entities.
  - Preserve special terminology, links, and phrases in the extracted statement.
  - Individual words or phrases (such as meaningful titles or section names) must be understood within the context of the entire response and form a coherent statement. Non-meaningful words or phrases should not be extracted as statements.
  - Don't stop generation until every single piece of information is extracted.
  **Granularity Rules (apply in order):**
  a) **Keep together as single statements:**
    - Facts with causal relationships (e.g., "Because of X, Y occurred")
    - Facts with temporal relationships (e.g., "When X began, Y happened")
    - Facts with conditional relationships (e.g., "If X, then Y")
    - Multiple items that share the same relationship to a subject (e.g., "John played in Musical A, Musical B, and Musical C")
  b) **Separate into distinct statements:**
    - Items that have different relationships to a subject (e.g., "John played in Musical A" and "John directed Musical B" should be two statements)
    - Items that have different contexts or timeframes
    - Facts that can stand independently without losing meaning
  c) **When in doubt:**
    - Prioritize self-containment: the statement must make complete sense on its own
    - Prioritize preserving logical relationships: don't break apart facts that depend on each other for meaning
2. For each statement in the response, identify ALL grounding facts that support it (fully or partially).
  Assignment Process:
  - Use the 0-based index provided in front of each grounding fact (e.g., "Index 0:", "Index 1:")
  - Return a list of ALL supporting fact indices (e.g., [0, 2, 5])
  - Return an empty list [] if no grounding facts support the statement
  - A fact "supports" a statement if it provides evidence for any part of that statement
  Inference and Reasoning:
  - A statement can be supported through DIRECT matching OR through INFERENCE from multiple facts
  - Direct support: The grounding fact explicitly states the information (e.g., "User is in Netherlands" → Index: "User is based in Netherlands")
  - Inference support: The statement can be logically derived by combining multiple grounding facts
    • Example: Statement "User joined in 2022" can be inferred from Index 0: "User has 3 years tenure" + Index 1: "Current year is 2025"
    • Example: Statement "User prefers dark mode UI" can be inferred from Index 2: "User always disables light themes" + Index 3: "User customizes to dark colors"
    • Example: Statement "Director A was born later than Director B" can be inferred from Index 0: "Director A born 1946" + Index 1: "Director B born 1910" (comparison: 1946 > 1910)
  - Include ALL facts used in the reasoning chain, even if individually they don't fully support the statement
3. Output your assignments as a JSON array with the following structure:
### Output Format
[
    {
        "Fact": "Verbatim statement from the response",
        "Assignment": [0, 2, 5]  // List of supporting fact indices, or []
    }
]
Field Definitions:
* "Fact": The exact factual statement from the response (word-for-word)
* "Assignment": List of 0-based grounding fact indices that support this statement (directly or through inference), or [] if none
Output ONLY the JSON array, without any additional text or explanation.

### Examples

#### Example 1: Basic Fact Assignment
Query:
"Who founded SpaceX and when?"

Response:
"SpaceX was founded in 2002 by Elon Musk. He enjoys playing video games."

Grounding Facts:
[
  "Index 0: SpaceX was founded by Elon Musk",
  "Index 1: SpaceX was established in the year 2002",
  "Index 2: Elon Musk is the CEO of Tesla"
]

Output:
[
  {"Fact": "SpaceX was founded by Elon Musk", "Assignment": [0]},
  {"Fact": "SpaceX was founded in 2002", "Assignment": [1]},
  {"Fact": "Elon Musk founded SpaceX in 2002", "Assignment": [0, 1]},
  {"Fact": "Elon Musk enjoys playing video games", "Assignment": []}
]

Explanation:
- Fact 1: Directly matches the founder claim in Index 0
- Fact 2: Directly matches the year claim in Index 1
- Fact 3: Inferred by combining Index 0 (founder) + Index 1 (year) to validate the full statement
- Fact 4: No grounding fact mentions video games (cannot be inferred from context)

#### Example 2: Complex Inference with Tenure Calculation
Query:
"How long has Satya Nadella led Microsoft and what is his background?"

Response:
"Satya Nadella has led Microsoft for over 10 years and previously worked on cloud infrastructure."

Grounding Facts:
[
  "Index 0: Satya Nadella was named CEO of Microsoft in February 2014.",
  "Index 1: The current date is March 2024.",
  "Index 2: Before becoming CEO, Nadella was Executive Vice President of Microsoft's Cloud and Enterprise group.",
  "Index 3: Nadella originally joined Microsoft in 1992.",
  "Index 4: Microsoft is headquartered in Redmond, Washington."
]

Output:
[
  {"Fact": "Satya Nadella has led Microsoft for over 10 years", "Assignment": [0, 1]},
  {"Fact": "Satya Nadella previously worked on cloud infrastructure", "Assignment": [2]}
]

Explanation:
- Fact 1: Inferred by calculating tenure from Index 0 (CEO start Feb 2014) + Index 1 (current date Mar 2024) = ~10 years and 1 month.
- Fact 2: Inferred from Index 2 (EVP of Cloud group = worked on cloud infrastructure).

#### Example 3: Multi-Fact Inference with Birth Date Comparison
Query:
"Which film has the director who was born later, Best Man Wins or Mrs Caldicot's Cabbage War?"

Response:
"The film with the director born later is Mrs Caldicot's Cabbage War. Its director, Ian Sharp, was born in 1946, while Best Man Wins was directed by John Sturges, who was born in 1910."

Grounding Facts:
[
  "Index 0: Best Man Wins is a 1948 American historical drama film directed by John Sturges, based on a story by Mark Twain.",
  "Index 1: Ian Sharp was born on 13 November 1946 in Clitheroe, Lancashire.",
  "Index 2: Ian Sharp is an English film and television director.",
  "Index 3: John Eliot Sturges was born on January 3, 1910.",
  "Index 4: John Eliot Sturges was an American film director.",
  "Index 5: Mrs Caldicot's Cabbage War is a British comedy-drama film from 2002 directed by Ian Sharp and starring Pauline Collins, John Alderton and Peter Capaldi."
]

Output:
[
  {"Fact": "The film with the director born later is Mrs Caldicot's Cabbage War", "Assignment": [1, 3, 5]},
  {"Fact": "Mrs Caldicot's Cabbage War's director, Ian Sharp, was born in 1946", "Assignment": [1, 5]},
  {"Fact": "Best Man Wins was directed by John Sturges", "Assignment": [0, 4]},
  {"Fact": "John Sturges was born in 1910", "Assignment": [3]}
]

Explanation:
- Fact 1: Inferred by comparing birth years from Index 1 (Ian Sharp born 1946) and Index 3 (John Sturges born 1910), combined with Index 5 (Ian Sharp directed Mrs Caldicot's Cabbage War). The comparison "born later" (1946 > 1910) is derived from these facts.
- Fact 2: Directly combines Index 1 (Ian Sharp's birth year) + Index 5 (Ian Sharp directed Mrs Caldicot's Cabbage War)
- Fact 3: Combines Index 0 (Best Man Wins directed by John Sturges) + Index 4 (John Sturges is a director)
- Fact 4: Directly matches Index 3 (John Eliot Sturges was born on January 3, 1910)

#### Example 4: Multi-Fact Inference with Death Date Comparison
Query:
"Which director died first, the director of Lucky Jordan or the director of Adventures of Joselito and Tom Thumb?"

Response:
"The director of \"Lucky Jordan,\" Frank Tuttle, died first. Frank Tuttle died on January 6, 1963, while René Cardona, the director of \"Adventures of Joselito and Tom Thumb,\" died on April 25, 1988."

Grounding Facts:
[
  "Index 0: Lucky Jordan is a 1942 film directed by Frank Tuttle.",
  "Index 1: Lucky Jordan stars Alan Ladd in his first leading role.",
  "Index 2: Frank Wright Tuttle was a Hollywood film director and writer.",
  "Index 3: Frank Wright Tuttle was born on August 6, 1892.",
  "Index 4: Frank Wright Tuttle died on January 6, 1963.",
  "Index 5: René Cardona was born on October 8, 1905 in Havana, Cuba.",
  "Index 6: René Cardona died on April 25, 1988 in Mexico City.",
  "Index 7: René Cardona was a director in the Golden Age of Mexican cinema.",
  "Index 8: Adventures of Joselito and Tom Thumb is a 1960 Mexican-Spanish musical film directed by René Cardona and starring Joselito, Cesáreo Quezadas and Enrique Rambal.",
  "Index 9: Tomy's Secret is a 1963 French-Spanish musical film directed by Antonio del Amo and starring Fabienne Dali, Joselito and Fernando Casanova."
]

Output:
[
  {"Fact": "The director of \"Lucky Jordan,\" Frank Tuttle, died first", "Assignment": [0, 4, 6, 8]},
  {"Fact": "Frank Tuttle died on January 6, 1963", "Assignment": [4]},
  {"Fact": "René Cardona, the director of \"Adventures of Joselito and Tom Thumb,\" died on April 25, 1988", "Assignment": [6, 8]}
]

Explanation:
- Fact 1: Inferred by comparing death dates from Index 4 (Frank Tuttle died 1963) and Index 6 (René Cardona died 1988), combined with Index 0 (Frank Tuttle directed Lucky Jordan) and Index 8 (René Cardona directed Adventures of Joselito and Tom Thumb). The comparison "died first" (1963 < 1988) is derived from these facts.
- Fact 2: Directly matches Index 4 (Frank Wright Tuttle died on January 6, 1963)
- Fact 3: Directly combines Index 6 (René Cardona's death date) + Index 8 (René Cardona directed Adventures of Joselito and Tom Thumb)

### Query
{query}
### Response
{response}
### Grounding Fact List
{grounding_facts})__";

const char* kAnswerBody = R"__(You are a helpful assistant that provides accurate, concise answers based on the provided grounding context.

Your task is to answer the user's query using only the information provided in the grounding context.

**Important Guidelines:**
- Respond in full sentences. Do not use bullet points or lists.
- Only use information that is directly supported by the grounding context
- Answer to the best of your ability, do not hallucinate or make up information.

### User Query
{user_query}

### Grounding Context
{grounding_context})__";

const char* kJudgeBody = R"__(You are an answer correctness evaluator. Your task is to determine if an actual answer is correct with respect to a reference answer for a given query.

**Evaluation Criteria:**
- The actual answer should be semantically equivalent to the reference answer, even if the wording differs
- The actual answer should correctly address the query
- Minor differences in phrasing or formatting should not affect correctness
- The actual answer must contain the same key information as the reference answer

**Output Format:**
You must output ONLY a boolean value: `true` or `false`
- `true` if the actual answer is correct with respect to the reference answer
- `false` if the actual answer is incorrect, incomplete, or does not match the reference answer

### Query
{query}

### Reference Answer
{reference_answer}

### Actual Answer
{actual_answer})__";

}  // namespace

const PromptTemplate& decompose_template() {
    static const PromptTemplate tmpl{
        "decompose", kDecomposeBody, {"user_query", "grounding_data"}};
    return tmpl;
}

const PromptTemplate& assign_template() {
    static const PromptTemplate tmpl{
        "assign", kAssignBody, {"query", "response", "grounding_facts"}};
    return tmpl;
}

const PromptTemplate& answer_template() {
    static const PromptTemplate tmpl{
        "answer", kAnswerBody, {"user_query", "grounding_context"}};
    return tmpl;
}

const PromptTemplate& judge_template() {
    static const PromptTemplate tmpl{
        "judge", kJudgeBody, {"query", "reference_answer", "actual_answer"}};
    return tmpl;
}

}  // namespace aif::llm
