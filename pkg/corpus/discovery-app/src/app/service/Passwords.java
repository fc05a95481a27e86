package app.service;

import java.security.SecureRandom;
import javax.crypto.SecretKey;
import javax.crypto.SecretKeyFactory;
import javax.crypto.spec.PBEKeySpec;
import org.bouncycastle.crypto.generators.SCrypt;

public class Passwords {
    private static final int ITERATIONS = 210000;

    public SecretKey pbkdf2(char[] password) throws Exception {
        byte[] salt = new byte[16];
        new SecureRandom().nextBytes(salt);
        SecretKeyFactory factory = SecretKeyFactory.getInstance("PBKDF2WithHmacSHA512");
        return factory.generateSecret(new PBEKeySpec(password, salt, ITERATIONS, 256));
    }

    public byte[] scrypt(byte[] password) {
        byte[] salt = new byte[16];
        new SecureRandom().nextBytes(salt);
        return SCrypt.generate(password, salt, 16384, 8, 1, 32);
    }
}
