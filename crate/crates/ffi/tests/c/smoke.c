#include <stdio.h>
#include <string.h>

#include "pubchain.h"

#define CHECK(expr)                                                         \
    do {                                                                    \
        PcStatus s_ = (expr);                                               \
        if (s_ != PC_STATUS_OK) {                                           \
            const char *m_ = pc_last_error();                               \
            fprintf(stderr, "%s -> %d (%s)\n", #expr, s_, m_ ? m_ : "");    \
            return 1;                                                       \
        }                                                                   \
    } while (0)

int main(void) {
    PcLedger *l = NULL;
    char *author = NULL, *miner = NULL, *paper = NULL;
    uint64_t height = 0, balance = 0;

    CHECK(pc_ledger_new(NULL, &l));
    CHECK(pc_register(l, "author@x", &author));
    CHECK(pc_register(l, "miner@x", &miner));
    CHECK(pc_post_paper(l, author, "Title", (const uint8_t *)"body", 4, NULL, 0, &paper));
    CHECK(pc_seal_block(l, miner, &height));
    CHECK(pc_balance(l, miner, &balance));
    if (balance != 5800000000ULL) {
        fprintf(stderr, "miner balance %llu\n", (unsigned long long)balance);
        return 1;
    }
    if (pc_seal_block(l, "nobody", &height) != PC_STATUS_NOT_FOUND || pc_last_error() == NULL) {
        return 1;
    }

    double values[] = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    double mean = 0;
    CHECK(pc_trimmed_mean(values, 10, 0.1, &mean));
    printf("height=%llu mean=%.1f paper=%zu\n", (unsigned long long)height, mean, strlen(paper));

    pc_string_free(author);
    pc_string_free(miner);
    pc_string_free(paper);
    pc_ledger_free(l);
    return 0;
}
