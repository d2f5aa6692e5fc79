#include <doctest.h>

#include <torch/torch.h>

#include "swvae/errors.hpp"
#include "swvae/latent_swap.hpp"
#include "swvae/model.hpp"
#include "swvae/objectives.hpp"

using namespace swvae;

namespace {

constexpr double kLn2 = 0.6931471805599453;

PairVaeTerms dummy_vae_terms(double left = 10.0, double right = 20.0) {
    PairVaeTerms terms;
    terms.left.recon = torch::tensor(left * 0.9);
    terms.left.kl = torch::tensor(left * 0.1);
    terms.left.total = torch::tensor(left);
    terms.right.recon = torch::tensor(right * 0.9);
    terms.right.kl = torch::tensor(right * 0.1);
    terms.right.total = torch::tensor(right);
    return terms;
}

// Forces the discriminator to emit one fixed logit everywhere.
void pin_discriminator(PairDiscriminator& disc, double logit) {
    const torch::NoGradGuard no_grad;
    for (auto& p : disc->parameters()) p.zero_();
    disc->named_parameters()["fc2.bias"].fill_(logit);
}

}  // namespace

TEST_CASE("sim-mse swap term matches hand-computed squared norms") {
    const auto terms = dummy_vae_terms();
    const torch::Tensor base = torch::full({1, 1, 2, 2}, 0.25);
    torch::Tensor moved = base.clone();
    moved[0][0][0][0] += 0.5;

    const auto equal_case = sim_mse_loss(base, base, base, base, terms, 2.0);
    CHECK(equal_case.swap_term == doctest::Approx(0.0));
    CHECK(equal_case.total.item<double>() == doctest::Approx(30.0));

    const auto moved_case = sim_mse_loss(base, moved, base, base, terms, 2.0);
    CHECK(moved_case.swap_term == doctest::Approx(0.5));  // gamma * 0.25
    CHECK(moved_case.total.item<double>() ==
          doctest::Approx(moved_case.vae_l + moved_case.vae_m + moved_case.swap_term));

    const auto off = sim_mse_loss(base, moved, base, moved, terms, 0.0);
    CHECK(off.swap_term == doctest::Approx(0.0));
    CHECK(off.total.item<double>() == doctest::Approx(30.0));
}

TEST_CASE("sim-bce swap term equals the pixel cross-entropy") {
    const auto terms = dummy_vae_terms();
    const torch::Tensor half = torch::full({1, 1, 2, 2}, 0.5);
    const torch::Tensor zero_logits = torch::zeros({1, 1, 2, 2});  // sigmoid -> 0.5
    const auto result = sim_bce_loss(half, zero_logits, half, zero_logits, terms, 1.0);
    // 4 ln 2 per image and side
    CHECK(result.swap_term == doctest::Approx(8.0 * kLn2).epsilon(1e-6));

    const auto off = sim_bce_loss(half, zero_logits, half, zero_logits, terms, 0.0);
    CHECK(off.total.item<double>() == doctest::Approx(30.0));

    const torch::Tensor bad_target = torch::full({1, 1, 2, 2}, 1.5);
    CHECK_THROWS_AS(sim_bce_loss(bad_target, zero_logits, half, zero_logits, terms, 1.0),
                    DataError);
}

TEST_CASE("gan generator loss follows -gamma log p") {
    torch::manual_seed(2);
    PairDiscriminator disc(ImageShape{16, 16, 1});
    const auto terms = dummy_vae_terms();
    const torch::Tensor img = torch::rand({3, 1, 16, 16});

    pin_discriminator(disc, 0.0);  // p = 0.5
    const auto half = gan_generator_loss(disc, img, img, img, img, terms, 1.0);
    CHECK(half.swap_term == doctest::Approx(2.0 * kLn2).epsilon(1e-6));

    double previous = std::numeric_limits<double>::infinity();
    for (double p : {0.1, 0.5, 0.9}) {
        pin_discriminator(disc, std::log(p / (1.0 - p)));
        const auto result = gan_generator_loss(disc, img, img, img, img, terms, 2.0);
        CHECK(result.swap_term == doctest::Approx(-2.0 * 2.0 * std::log(p)).epsilon(1e-5));
        CHECK(result.swap_term < previous);
        previous = result.swap_term;
    }

    pin_discriminator(disc, -3.0);
    const auto off = gan_generator_loss(disc, img, img, img, img, terms, 0.0);
    CHECK(off.total.item<double>() == doctest::Approx(30.0));
}

TEST_CASE("gan discriminator loss at p=0.5 is 4 ln 2 with positives") {
    torch::manual_seed(3);
    PairDiscriminator disc(ImageShape{16, 16, 1});
    pin_discriminator(disc, 0.0);
    const torch::Tensor img = torch::rand({4, 1, 16, 16});
    const auto with_pos = gan_discriminator_loss(disc, img, img, img, img, true);
    CHECK(with_pos.item<double>() == doctest::Approx(4.0 * kLn2).epsilon(1e-6));
    const auto without = gan_discriminator_loss(disc, img, img, img, img, false);
    CHECK(without.item<double>() == doctest::Approx(2.0 * kLn2).epsilon(1e-6));
}

TEST_CASE("a perfect discriminator drives its loss to zero") {
    torch::manual_seed(4);
    PairDiscriminator disc(ImageShape{16, 16, 1});
    // p -> 0 on swapped pairs and p -> 1 on identical pairs is the ideal
    // regime; emulate the two limits with pinned logits.
    const torch::Tensor img = torch::rand({2, 1, 16, 16});
    pin_discriminator(disc, -30.0);
    const auto negatives_only = gan_discriminator_loss(disc, img, img, img, img, false);
    CHECK(negatives_only.item<double>() == doctest::Approx(0.0).epsilon(1e-6));
    pin_discriminator(disc, 30.0);
    const torch::Tensor ones_logit = disc->logits(img, img);
    CHECK(torch::binary_cross_entropy_with_logits(ones_logit, torch::ones_like(ones_logit))
              .item<double>() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("discriminator training never reaches the generator") {
    torch::manual_seed(5);
    ModelConfig mc;
    mc.d_z = 4;
    mc.image = {16, 16, 1};
    mc.conv_channels = {8, 8};
    mc.dense_units = 32;
    SwVaeModel model(mc);
    PairDiscriminator disc(mc.image);

    const torch::Tensor x = torch::rand({2, 1, 16, 16});
    const auto post = model->encode(x);
    const torch::Tensor z = reparameterize(post, torch::randn_like(post.mu));
    const torch::Tensor rec = torch::sigmoid(model->decode(z));
    const torch::Tensor swapped = torch::sigmoid(model->decode(z.flip(0)));

    const auto loss = gan_discriminator_loss(disc, rec, swapped, rec, swapped, true);
    loss.backward();
    for (const auto& p : model->parameters()) CHECK_FALSE(p.grad().defined());
    bool disc_has_grad = false;
    for (const auto& p : disc->parameters())
        if (p.grad().defined() && p.grad().abs().sum().item<double>() > 0.0)
            disc_has_grad = true;
    CHECK(disc_has_grad);
}

TEST_CASE("every variant reduces to the double-vae loss at gamma zero") {
    torch::manual_seed(6);
    PairDiscriminator disc(ImageShape{16, 16, 1});
    const auto terms = dummy_vae_terms(7.0, 9.0);
    const torch::Tensor rec = torch::rand({2, 1, 16, 16});
    const torch::Tensor logits = torch::randn({2, 1, 16, 16});

    const auto mse = sim_mse_loss(rec, torch::sigmoid(logits), rec, torch::sigmoid(logits), terms, 0.0);
    const auto bce = sim_bce_loss(rec, logits, rec, logits, terms, 0.0);
    const auto gan = gan_generator_loss(disc, rec, torch::sigmoid(logits), rec,
                                        torch::sigmoid(logits), terms, 0.0);
    CHECK(mse.total.item<double>() == doctest::Approx(16.0));
    CHECK(bce.total.item<double>() == doctest::Approx(16.0));
    CHECK(gan.total.item<double>() == doctest::Approx(16.0));
}

TEST_CASE("identity swaps leave reconstructions bitwise equal") {
    torch::manual_seed(7);
    ModelConfig mc;
    mc.d_z = 4;
    mc.image = {16, 16, 1};
    mc.conv_channels = {8, 8};
    mc.dense_units = 32;
    SwVaeModel model(mc);

    const torch::Tensor x = torch::rand({2, 1, 16, 16});
    const auto post = model->encode(x);
    const torch::Tensor z = reparameterize(post, torch::randn_like(post.mu));
    // swapping identical coordinates: z_hat == z exactly
    const auto [z_hat, z_hat_m] = swap_latents(z, z.clone(), swap_mask_from_sets({{1, 3}, {0}}, 4));
    CHECK(torch::equal(z_hat, z));

    const torch::Tensor logits = model->decode(z);
    const torch::Tensor logits_hat = model->decode(z_hat);
    CHECK(torch::equal(logits, logits_hat));

    const auto terms = PairVaeTerms{vae_loss(x, logits, post, 1.0), vae_loss(x, logits, post, 1.0)};
    const auto mse = sim_mse_loss(torch::sigmoid(logits), torch::sigmoid(logits_hat),
                                  torch::sigmoid(logits), torch::sigmoid(logits_hat), terms, 3.0);
    CHECK(mse.swap_term == 0.0);  // exactly zero

    // the BCE comparison bottoms out at the pixel entropy of the original
    // reconstruction, its global minimum over x_hat
    const auto bce = sim_bce_loss(torch::sigmoid(logits), logits_hat, torch::sigmoid(logits),
                                  logits_hat, terms, 1.0);
    const torch::Tensor p = torch::sigmoid(logits);
    const double entropy =
        -(p * torch::log(p) + (1.0 - p) * torch::log(1.0 - p)).sum().item<double>() / 2.0;
    CHECK(bce.swap_term == doctest::Approx(2.0 * entropy).epsilon(1e-5));
}

TEST_CASE("decomposition identity holds for random inputs") {
    torch::manual_seed(8);
    PairDiscriminator disc(ImageShape{16, 16, 1});
    for (int trial = 0; trial < 5; ++trial) {
        const auto terms = dummy_vae_terms(torch::rand({1}).item<double>() * 100,
                                           torch::rand({1}).item<double>() * 100);
        const torch::Tensor rec = torch::rand({3, 1, 16, 16});
        const torch::Tensor logits = torch::randn({3, 1, 16, 16});
        const double gamma = torch::rand({1}).item<double>() * 2;
        for (const auto& result :
             {sim_mse_loss(rec, torch::sigmoid(logits), rec, torch::sigmoid(logits), terms, gamma),
              sim_bce_loss(rec, logits, rec, logits, terms, gamma),
              gan_generator_loss(disc, rec, torch::sigmoid(logits), rec, torch::sigmoid(logits),
                                 terms, gamma)}) {
            const double total = result.total.item<double>();
            const double sum = result.vae_l + result.vae_m + result.swap_term;
            CHECK(total == doctest::Approx(sum).epsilon(1e-6));
        }
    }
}

TEST_CASE("non-finite inputs are rejected") {
    const auto terms = dummy_vae_terms();
    torch::Tensor bad = torch::rand({1, 1, 2, 2});
    bad[0][0][0][0] = std::numeric_limits<float>::quiet_NaN();
    const torch::Tensor good = torch::rand({1, 1, 2, 2});
    CHECK_THROWS_AS(sim_mse_loss(bad, good, good, good, terms, 1.0), NumericError);
    CHECK_THROWS_AS(sim_mse_loss(good, good, good, torch::rand({1, 1, 2, 3}), terms, 1.0),
                    DataError);
}
