package app.crypto;

import java.security.KeyPair;
import java.security.KeyPairGenerator;
import java.security.spec.ECGenParameterSpec;
import javax.crypto.KeyGenerator;
import javax.crypto.SecretKey;

public class Keys {
    public SecretKey newDataKey() throws Exception {
        KeyGenerator generator = KeyGenerator.getInstance(CryptoConfig.CIPHER_ALG);
        generator.init(CryptoConfig.AES_BITS);
        return generator.generateKey();
    }

    public KeyPair newSigningKeys() throws Exception {
        KeyPairGenerator generator = KeyPairGenerator.getInstance("RSA");
        generator.initialize(CryptoConfig.RSA_BITS);
        return generator.generateKeyPair();
    }

    public KeyPair newAgreementKeys() throws Exception {
        KeyPairGenerator generator = KeyPairGenerator.getInstance("EC");
        generator.initialize(new ECGenParameterSpec("secp256r1"));
        return generator.generateKeyPair();
    }
}
