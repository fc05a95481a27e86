package app.crypto;

/** Algorithm choices shared by the services. */
public final class CryptoConfig {
    public static final String CIPHER_ALG = "AES";
    public static final String CIPHER_MODE = "CBC";
    public static final int AES_BITS = 256;
    public static final String SIGNATURE_ALG = "SHA256withRSA";
    public static final int RSA_BITS = 3072;

    private CryptoConfig() {
    }

    public static String transformation() {
        return CIPHER_ALG + "/" + CIPHER_MODE + "/PKCS5Padding";
    }
}
